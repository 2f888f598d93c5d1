#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace stabledecomp;
using namespace stabledecomp::testing;

namespace {

constexpr std::size_t kN = 100000;

SimulationConfig config(std::uint64_t seed, std::size_t n = kN) {
  SimulationConfig cfg;
  cfg.seed = seed;
  cfg.n_samples = n;
  return cfg;
}

MaxStableRep make_max(double alpha, const Matrix& f, std::vector<double> mu = {}) {
  if (mu.empty()) mu.assign(f.cols(), 1.0);
  return MaxStableRep(alpha, FinitePointSpace(labels("s", f.cols()), std::move(mu)), labels("t", f.rows()), f);
}

std::vector<std::vector<double>> probes_for(Rng& rng, const SpectralRep& rep, std::size_t count) {
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    auto a = random_vector(rng, rep.time_count(), -1.0, 1.0);
    const double sigma = scale_functional(rep, a);
    if (sigma < 0.05 || sigma > 2.0) continue;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

TEST(CounterUniform, RangeAndKeying) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = counter_uniform(42, i, 3, 0);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(counter_uniform(1, 2, 3, 4), counter_uniform(1, 2, 3, 4));
  EXPECT_NE(counter_uniform(1, 2, 3, 4), counter_uniform(1, 2, 3, 5));
  EXPECT_NE(counter_uniform(1, 2, 3, 4), counter_uniform(1, 3, 2, 4));
  EXPECT_NE(counter_uniform(1, 2, 3, 4), counter_uniform(2, 2, 3, 4));
}

TEST(Determinism, IndependentOfChunkingAndThreads) {
  Rng rng(401);
  auto rep = random_rep(rng, 5, 3, 1.3);
  SimulationConfig a = config(9, 5000);
  a.threads = 1;
  SimulationConfig b = a;
  b.threads = 4;
  b.chunk_size = 7;
  SimulationConfig c = a;
  c.threads = 3;
  c.chunk_size = 100000;
  auto sa = sample_sas(rep, a), sb = sample_sas(rep, b), sc = sample_sas(rep, c);
  EXPECT_EQ(sa.data, sb.data);
  EXPECT_EQ(sa.data, sc.data);
  auto max = associate(make_rep(1.3, Matrix{{1.0, 0.5}, {0.2, 2.0}}));
  EXPECT_EQ(sample_frechet(max, a).data, sample_frechet(max, b).data);
  EXPECT_NE(sample_sas(rep, config(10, 5000)).data, sa.data);
}

TEST(SampleSas, UnitScaleCharacteristicFunction) {
  for (double alpha : {0.6, 1.0, 1.5, 1.9}) {
    auto rep = make_rep(alpha, Matrix{{1.0}});
    auto samples = sample_sas(rep, config(402));
    std::vector<std::vector<double>> probes{{0.25}, {0.5}, {1.0}, {1.5}, {2.0}};
    auto report = check_empirical_cf(samples, rep, probes, 0.0);
    for (const auto& p : report.probes) {
      EXPECT_NEAR(p.theoretical, std::exp(-std::pow(std::fabs(p.a[0]), alpha)), 1e-15);
      EXPECT_LT(p.deviation, report.envelope) << "alpha " << alpha << " theta " << p.a[0];
    }
    EXPECT_TRUE(report.pass);
  }
}

TEST(SampleSas, RescaledEquivalentAgrees) {
  Rng rng(403);
  auto rep = random_rep(rng, 4, 2, 1.4);
  Matrix g = rep.values();
  auto mu = rep.space().weights();
  for (std::size_t t = 0; t < 2; ++t) g(t, 0) *= -2.5;
  mu[0] /= std::pow(2.5, 1.4);
  auto other = make_rep(1.4, g, mu);
  ASSERT_TRUE(same_process(rep, other));
  auto probes = probes_for(rng, rep, 20);
  auto ra = check_empirical_cf(sample_sas(rep, config(1)), rep, probes, 0.0);
  auto rb = check_empirical_cf(sample_sas(other, config(2)), rep, probes, 0.0);
  EXPECT_TRUE(ra.pass);
  EXPECT_TRUE(rb.pass);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_LT(std::fabs(ra.probes[i].empirical - rb.probes[i].empirical), 2 * ra.envelope);
  }
}

TEST(SampleSas, Symmetric) {
  Rng rng(404);
  auto rep = random_rep(rng, 3, 2, 0.8);
  auto samples = sample_sas(rep, config(5));
  for (std::size_t t = 0; t < 2; ++t) {
    double sum = 0.0;
    for (double x : samples.column(t)) sum += (x > 0) - (x < 0);
    EXPECT_LT(std::fabs(sum / kN), 4.0 / std::sqrt(static_cast<double>(kN)));
  }
}

TEST(CheckCf, FiftyProbes) {
  Rng rng(405);
  auto rep = random_rep(rng, 5, 3, 1.2);
  auto report = check_empirical_cf(sample_sas(rep, config(7)), rep, probes_for(rng, rep, 50), 0.01);
  EXPECT_EQ(report.probes.size(), 50u);
  EXPECT_EQ(report.flagged, 0u);
  EXPECT_TRUE(report.pass);
}

TEST(CheckCf, DifferentLawFails) {
  Rng rng(406);
  auto rep = random_rep(rng, 3, 2, 1.2);
  Matrix g = rep.values();
  for (std::size_t s = 0; s < 3; ++s) g(1, s) *= 2.0;
  auto wrong = make_rep(1.2, g, rep.space().weights());
  ASSERT_FALSE(same_process(rep, wrong));
  auto report = check_empirical_cf(sample_sas(wrong, config(8)), rep, probes_for(rng, rep, 50), 0.01);
  EXPECT_GT(report.flagged, 0u);
  EXPECT_FALSE(report.pass);
}

TEST(CheckCf, EmptySample) {
  auto rep = make_rep(1.0, Matrix{{1.0}});
  auto samples = sample_sas(rep, config(1, 0));
  try {
    check_empirical_cf(samples, rep, {{1.0}}, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySample);
  }
}

TEST(SampleFrechet, UnitFrechetAtOne) {
  auto rep = make_max(1.0, Matrix{{1.0}});
  auto samples = sample_frechet(rep, config(409));
  std::size_t hits = 0;
  for (double x : samples.column(0)) hits += x <= 1.0;
  const double p = std::exp(-1.0);
  const double se = std::sqrt(p * (1 - p) / kN);
  EXPECT_NEAR(static_cast<double>(hits) / kN, p, 4 * se);
}

TEST(SampleFrechet, JointCdfAtProbes) {
  auto rep = make_max(1.7, Matrix{{1.0, 0.3}, {0.4, 1.2}}, {1.0, 2.0});
  std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> probes{
      {{0, 1}, {1.0, 1.5}}, {{0, 1}, {2.0, 2.0}}, {{1}, {0.8}}, {{0, 1}, {0.7, 3.0}}};
  auto report = check_empirical_cdf(sample_frechet(rep, config(410)), rep, probes, 0.01);
  for (const auto& p : report.probes) {
    EXPECT_NEAR(p.theoretical, oracle_frechet_cdf(1.7, rep.values(), rep.space().weights(), p.rows, p.y), 1e-15);
    EXPECT_FALSE(p.flagged);
  }
  for (const auto& m : report.marginals) EXPECT_GE(m.ks.p_value, 0.01);
  EXPECT_TRUE(report.pass);
}

TEST(SampleFrechet, AlphaPowerConsistency) {
  auto rep = make_max(2.6, Matrix{{1.0, 0.5, 0.0}, {0.2, 1.0, 2.0}}, {1.0, 0.5, 0.3});
  auto direct = sample_frechet(rep, config(411));
  auto transformed = sample_frechet(alpha_power_transform(rep), config(412));
  for (std::size_t t = 0; t < 2; ++t) {
    auto powered = direct.column(t);
    for (auto& x : powered) x = std::pow(x, 2.6);
    EXPECT_GE(ks_two_sample(powered, transformed.column(t)).p_value, 0.01);
  }
}

TEST(CheckCdf, MaxDecompositionSampleLevel) {
  Rng rng(413);
  auto rep = make_max(1.3, Matrix{{1.0, 0.2, 0.7, 0.0}, {0.1, 1.0, 0.7, 1.5}}, {1.0, 2.0, 0.5, 0.4});
  WeightFamily w;
  w.r.assign(2, std::vector<double>(4));
  for (std::size_t s = 0; s < 4; ++s) {
    const double a = uniform(rng, 0.0, 1.0);
    w.r[0][s] = std::pow(a, 1 / 1.3);
    w.r[1][s] = std::pow(1 - a, 1 / 1.3);
  }
  auto comps = make_max_components(rep, w);
  auto direct = sample_frechet(rep, config(414));
  auto y1 = sample_frechet(comps[0], config(415));
  auto y2 = sample_frechet(comps[1], config(416));
  for (std::size_t t = 0; t < 2; ++t) {
    auto a = y1.column(t), b = y2.column(t);
    for (std::size_t i = 0; i < kN; ++i) a[i] = std::max(a[i], b[i]);
    EXPECT_GE(ks_two_sample(a, direct.column(t)).p_value, 0.01);
  }
}

TEST(CheckCdf, WrongAlphaFails) {
  auto truth = make_max(1.0, Matrix{{1.0, 0.5}, {0.5, 1.0}});
  auto wrong = make_max(1.6, Matrix{{1.0, 0.5}, {0.5, 1.0}});
  std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> probes{{{0}, {1.0}}};
  auto report = check_empirical_cdf(sample_frechet(wrong, config(417)), truth, probes, 0.01);
  EXPECT_FALSE(report.pass);
  for (const auto& m : report.marginals) EXPECT_LT(m.ks.p_value, 0.01);
}

TEST(CheckCdf, EmptySample) {
  auto rep = make_max(1.0, Matrix{{1.0}});
  EXPECT_THROW(check_empirical_cdf(sample_frechet(rep, config(1, 0)), rep, {}, 0.01), Error);
}

TEST(SumLaw, ComponentsSumToProcess) {
  Rng rng(418);
  auto rep = random_rep(rng, 4, 2, 1.5);
  WeightFamily w;
  w.r.assign(2, std::vector<double>(4));
  for (std::size_t s = 0; s < 4; ++s) {
    const double a = uniform(rng, 0.1, 0.9);
    w.r[0][s] = std::pow(a, 1 / 1.5);
    w.r[1][s] = -std::pow(1 - a, 1 / 1.5);
  }
  auto comps = make_components(rep, w);
  auto direct = sample_sas(rep, config(419));
  auto x1 = sample_sas(comps[0], config(420));
  auto x2 = sample_sas(comps[1], config(421));
  for (std::size_t t = 0; t < 2; ++t) {
    auto a = x1.column(t), b = x2.column(t);
    for (std::size_t i = 0; i < kN; ++i) a[i] += b[i];
    EXPECT_GE(ks_two_sample(a, direct.column(t)).p_value, 0.01);
  }
}

TEST(Kolmogorov, SurvivalFunctionValues) {
  // reference values of the limiting Kolmogorov distribution
  const std::vector<std::pair<double, double>> table{
      {0.3, 0.9999906941986655}, {0.5, 0.9639452436648751},   {0.8, 0.5441424115741981},
      {1.0, 0.26999967167735456}, {1.17, 0.12939004218561884}, {1.19, 0.11774229287977166},
      {1.36, 0.049485876755377876}, {1.63, 0.009846364888486529}, {2.0, 0.0006709252557796953},
      {3.0, 3.045995948942526e-08}};
  for (const auto& [x, q] : table) EXPECT_NEAR(kolmogorov_survival(x), q, 1e-12 + 1e-10 * q) << x;
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Kolmogorov, OneSampleStatistic) {
  // D for {0.1, 0.4, 0.7} against U(0,1): max(1/3-0.1, 0.4-1/3, 2/3-0.4, 0.7-2/3, 1-0.7) = 0.3
  auto r = ks_one_sample({0.7, 0.1, 0.4}, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_NEAR(r.statistic, 0.3, 1e-15);
  EXPECT_THROW(ks_one_sample({}, [](double) { return 0.0; }), Error);
}

TEST(Kolmogorov, TwoSampleStatistic) {
  auto r = ks_two_sample({1, 2, 3, 4}, {3, 4, 5, 6});
  EXPECT_NEAR(r.statistic, 0.5, 1e-15);
  EXPECT_NEAR(ks_two_sample({1, 2}, {1, 2}).statistic, 0.0, 0.0);
}

TEST(FrechetMarginal, ZeroRow) {
  auto rep = make_max(1.0, Matrix{{0.0}, {1.0}});
  EXPECT_EQ(frechet_marginal_cdf(rep, 0, 0.0), 1.0);
  EXPECT_EQ(frechet_marginal_cdf(rep, 1, 0.0), 0.0);
}

TEST(SampleFrechet, MarginalsPassKsAcrossSeeds) {
  auto rep = make_max(1.4, Matrix{{1.0, 0.3, 0.0}, {0.2, 0.8, 1.1}}, {0.7, 1.2, 0.4});
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto col = sample_frechet(rep, config(seed, 10000)).column(1);
    passes += ks_one_sample(col, [&](double y) { return frechet_marginal_cdf(rep, 1, y); }).p_value >= 0.01;
  }
  EXPECT_GE(passes, 99);
}
