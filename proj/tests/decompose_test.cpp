#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace stabledecomp;
using namespace stabledecomp::testing;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::UsageError;
}

// Random block-constant nonnegative weights with k components.
WeightFamily block_weights(Rng& rng, const SpectralRep& rep, std::size_t k) {
  const Partition part = ratio_partition(rep);
  const double alpha = rep.alpha().value();
  WeightFamily w;
  w.r.assign(k, std::vector<double>(rep.point_count()));
  for (const auto& block : part.blocks()) {
    std::vector<double> raw(k);
    double total = 0.0;
    for (auto& x : raw) {
      x = pick(rng, 0, 4) == 0 ? 0.0 : uniform(rng, 0.1, 1.0);
      total += x;
    }
    if (total == 0.0) {
      raw[0] = 1.0;
      total = 1.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double r = std::pow(raw[j] / total, 1.0 / alpha);
      for (std::size_t s : block) w.r[j][s] = r;
    }
  }
  return w;
}

}  // namespace

TEST(RatioPartition, ProportionalColumnsShareBlock) {
  auto p = ratio_partition(make_rep(1.0, Matrix{{1.0, 2.0}, {2.0, 4.0}}));
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.labeled_blocks()[0], (std::vector<std::string>{"s0", "s1"}));
}

TEST(RatioPartition, SignFlipSharesBlock) {
  EXPECT_EQ(ratio_partition(make_rep(1.0, Matrix{{1.0, -3.0}, {2.0, -6.0}})).size(), 1u);
}

TEST(RatioPartition, OrthogonalColumnsSeparate) {
  auto p = ratio_partition(make_rep(1.0, Matrix{{1.0, 0.0}, {0.0, 1.0}}));
  EXPECT_EQ(p.size(), 2u);
}

TEST(RatioPartition, MatchesPairwiseCrossRatios) {
  Rng rng(101);
  for (int i = 0; i < 200; ++i) {
    auto rep = random_clustered_rep(rng, 5, 3, pick(rng, 1, 5), 1.0);
    auto p = ratio_partition(rep);
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = 0; b < 5; ++b) {
        EXPECT_EQ(p.block_of(a) == p.block_of(b), oracle_proportional(rep.column(a), rep.column(b)));
      }
    }
  }
}

TEST(Partition, RejectsOverlapAndGaps) {
  FinitePointSpace space({"a", "b", "c"}, {1, 1, 1});
  EXPECT_NO_THROW(Partition({{0, 2}, {1}}, space));
  EXPECT_ANY_THROW(Partition({{0, 1}, {1, 2}}, space));
  EXPECT_ANY_THROW(Partition({{0, 1}}, space));
}

TEST(IsMinimal, Basics) {
  EXPECT_TRUE(is_minimal(make_rep(1.0, Matrix{{1.0, 0.0}, {0.0, 1.0}})));
  EXPECT_FALSE(is_minimal(make_rep(1.0, Matrix{{1.0, 2.0}, {2.0, 4.0}})));
  EXPECT_TRUE(is_minimal(make_rep(1.0, Matrix{{3.0}, {-1.0}})));
}

TEST(Minimalize, FixedPointOnMinimalRep) {
  auto rep = make_rep(1.3, Matrix{{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}, {1.0, 2.0, 0.5});
  auto m = minimalize(rep);
  EXPECT_EQ(m.rep.point_count(), 3u);
  EXPECT_TRUE(same_process(rep, m.rep));
}

TEST(Minimalize, CollapsesProportionalPair) {
  auto rep = make_rep(1.0, Matrix{{1.0, 2.0}, {2.0, 4.0}});
  auto m = minimalize(rep);
  EXPECT_EQ(m.rep.point_count(), 1u);
  EXPECT_EQ(m.rep.space().label(0), "s0+s1");
  EXPECT_TRUE(same_process(rep, m.rep));
  Rng rng(1);
  EXPECT_TRUE(oracle_same_law(rep, m.rep, rng));
}

TEST(Minimalize, AntipodalPair) {
  auto m = minimalize(make_rep(1.0, Matrix{{1.0, -1.0}, {1.0, -1.0}}));
  ASSERT_EQ(m.rep.point_count(), 1u);
  EXPECT_NEAR(canonicalize(m.rep).total_mass, 2 * std::sqrt(2.0), 1e-12);
}

TEST(Minimalize, PreservesLawAndIsMinimal) {
  Rng rng(102);
  for (int i = 0; i < 100; ++i) {
    auto rep = random_clustered_rep(rng, 9, 3, pick(rng, 1, 6), uniform(rng, 0.3, 1.9));
    auto m = minimalize(rep);
    EXPECT_TRUE(same_process(rep, m.rep));
    EXPECT_TRUE(is_minimal(m.rep));
    EXPECT_EQ(m.collapse, ratio_partition(rep));
  }
}

TEST(MakeComponents, EqualSplitGivesScaledCopies) {
  Rng rng(103);
  for (double alpha : {0.5, 1.0, 1.5}) {
    auto rep = random_rep(rng, 4, 3, alpha);
    const double r = std::pow(2.0, -1.0 / alpha);
    WeightFamily w{{std::vector<double>(4, r), std::vector<double>(4, r)}};
    auto comps = make_components(rep, w);
    ASSERT_EQ(comps.size(), 2u);
    Matrix scaled = rep.values();
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t s = 0; s < 4; ++s) scaled(t, s) *= std::pow(2.0, -1.0 / alpha);
    }
    auto expected = make_rep(alpha, scaled, rep.space().weights());
    EXPECT_TRUE(same_process(comps[0], expected));
    EXPECT_TRUE(same_process(comps[1], expected));
    EXPECT_TRUE(verify_decomposition(rep, comps));
  }
}

TEST(MakeComponents, IndicatorSplitHasDisjointSupports) {
  Rng rng(104);
  auto rep = random_rep(rng, 5, 2, 1.2);
  WeightFamily w{{{1, 1, 0, 0, 0}, {0, 0, 1, 1, 1}}};
  auto comps = make_components(rep, w);
  EXPECT_EQ(comps[0].space().labels(), (std::vector<std::string>{"s0", "s1"}));
  EXPECT_EQ(comps[1].space().labels(), (std::vector<std::string>{"s2", "s3", "s4"}));
}

TEST(MakeComponents, ExponentsAddUp) {
  Rng rng(105);
  for (int i = 0; i < 20; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = random_rep(rng, 6, 3, alpha);
    // pointwise (not block-constant) signed weights
    WeightFamily w;
    w.r.assign(3, std::vector<double>(6));
    for (std::size_t s = 0; s < 6; ++s) {
      double a = uniform(rng, 0, 1), b = uniform(rng, 0, 1), c = uniform(rng, 0, 1);
      const double total = a + b + c;
      w.r[0][s] = std::pow(a / total, 1 / alpha) * (pick(rng, 0, 1) ? 1 : -1);
      w.r[1][s] = std::pow(b / total, 1 / alpha);
      w.r[2][s] = -std::pow(c / total, 1 / alpha);
    }
    auto comps = make_components(rep, w);
    for (int p = 0; p < 100; ++p) {
      auto a = random_vector(rng, 3);
      double sum = 0.0;
      for (const auto& c : comps) sum += oracle_scale(c, a);
      EXPECT_NEAR(sum, oracle_scale(rep, a), 1e-10 * (1 + sum));
    }
  }
}

TEST(MakeComponents, NormViolation) {
  auto rep = make_rep(1.0, Matrix{{1.0, 1.0}}, {1.0, 2.0});
  WeightFamily w{{{0.5, 0.5}, {0.4, 0.5}}};
  try {
    make_components(rep, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WeightNormViolation);
    EXPECT_EQ(e.subject().rfind("s0", 0), 0u);
  }
}

TEST(VerifyDecomposition, ExcessMassFails) {
  Rng rng(106);
  auto rep = random_rep(rng, 3, 2, 1.0);
  auto other = random_rep(rng, 2, 2, 1.0);
  EXPECT_FALSE(verify_decomposition(rep, {rep, other}));
}

TEST(VerifyDecomposition, TwoSinglePointsAgainstUnion) {
  auto a = make_rep(1.5, Matrix{{1.0}, {0.5}}, {2.0});
  auto b = make_rep(1.5, Matrix{{-1.0}, {2.0}}, {0.7});
  auto joint = make_rep(1.5, Matrix{{1.0, -1.0}, {0.5, 2.0}}, {2.0, 0.7});
  EXPECT_TRUE(verify_decomposition(joint, {a, b}));
  // characteristic functions agree on a grid
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      std::vector<double> c{0.5 * i, 0.4 * j};
      const double lhs = std::exp(-oracle_scale(joint, c));
      const double rhs = std::exp(-oracle_scale(a, c)) * std::exp(-oracle_scale(b, c));
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(VerifyDecomposition, Mismatches) {
  auto a = make_rep(1.0, Matrix{{1.0}});
  EXPECT_EQ(code_of([&] { verify_decomposition(a, {make_rep(1.5, Matrix{{1.0}})}); }), ErrorCode::AlphaMismatch);
  EXPECT_EQ(code_of([&] { verify_decomposition(a, {make_rep(1.0, Matrix{{1.0}, {1.0}})}); }),
            ErrorCode::TimesMismatch);
}

TEST(RecoverWeights, RoundTrip) {
  Rng rng(107);
  for (int i = 0; i < 200; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = random_clustered_rep(rng, 8, 3, pick(rng, 1, 5), alpha);
    auto w = block_weights(rng, rep, pick(rng, 1, 4));
    auto comps = make_components(rep, w);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (comps[k].point_count() == 0) continue;
      auto r = recover_weights(rep, comps[k]);
      for (std::size_t s = 0; s < 8; ++s) EXPECT_NEAR(r[s], w.r[k][s], 1e-9);
    }
  }
}

TEST(RecoverWeights, WholeProcessIsOne) {
  Rng rng(108);
  auto rep = random_clustered_rep(rng, 6, 2, 3, 1.1);
  for (double r : recover_weights(rep, rep)) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(RecoverWeights, ForeignDirection) {
  auto rep = make_rep(1.0, Matrix{{1.0, 0.0}, {0.0, 1.0}});
  auto foreign = make_rep(1.0, Matrix{{1.0}, {1.0}}, {0.01});
  EXPECT_EQ(code_of([&] { recover_weights(rep, foreign); }), ErrorCode::NotAComponent);
  // no shared direction means no common component either
  EXPECT_FALSE(common_component(rep, foreign).has_value());
}

TEST(RecoverWeights, ExcessMassAtSharedDirection) {
  auto rep = make_rep(1.0, Matrix{{1.0}}, {1.0});
  auto heavy = make_rep(1.0, Matrix{{1.0}}, {1.5});
  EXPECT_EQ(code_of([&] { recover_weights(rep, heavy); }), ErrorCode::NotAComponent);
}

TEST(RecoverWeights, AggregatesPointwiseWeightsPerBlock) {
  Rng rng(109);
  for (int i = 0; i < 100; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = random_clustered_rep(rng, 7, 3, 3, alpha);
    std::vector<double> r1(7), r2(7);
    for (std::size_t s = 0; s < 7; ++s) {
      r1[s] = uniform(rng, 0.0, 1.0) * (pick(rng, 0, 1) ? 1 : -1);
      r2[s] = std::pow(1 - std::pow(std::fabs(r1[s]), alpha), 1 / alpha);
    }
    auto comps = make_components(rep, WeightFamily{{r1, r2}});
    auto rhat = recover_weights(rep, comps[0]);
    auto part = ratio_partition(rep);
    for (const auto& block : part.blocks()) {
      double lhs_mass = 0.0, rhs = 0.0;
      for (std::size_t s : block) {
        double norm = 0.0;
        for (double x : rep.column(s)) norm += x * x;
        const double m = rep.space().weight(s) * std::pow(std::sqrt(norm), alpha);
        lhs_mass += m;
        rhs += std::pow(std::fabs(r1[s]), alpha) * m;
      }
      EXPECT_NEAR(std::pow(rhat[block[0]], alpha) * lhs_mass, rhs, 1e-9 * lhs_mass);
    }
  }
}

TEST(RecoverWeights, SuccessImpliesComplementCompletes) {
  Rng rng(110);
  for (int i = 0; i < 100; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = random_clustered_rep(rng, 6, 2, 3, alpha);
    auto comps = make_components(rep, block_weights(rng, rep, 2));
    if (comps[0].point_count() == 0) continue;
    auto r = recover_weights(rep, comps[0]);
    auto rc = complement_weights(r, alpha);
    auto parts = make_components(rep, WeightFamily{{r, rc}});
    std::vector<SpectralRep> split{comps[0]};
    if (parts[1].point_count()) split.push_back(parts[1]);
    EXPECT_TRUE(verify_decomposition(rep, split));
  }
}

TEST(ComplementWeights, ClampsRoundingAtOne) {
  auto rc = complement_weights({1.0 + 1e-14, 0.0, 1.0}, 1.5);
  EXPECT_EQ(rc[0], 0.0);
  EXPECT_EQ(rc[1], 1.0);
  EXPECT_EQ(rc[2], 0.0);
  EXPECT_EQ(code_of([] { complement_weights({1.1}, 1.0); }), ErrorCode::WeightNormViolation);
}

TEST(Uniqueness, SignsDoNotMatterMagnitudesDo) {
  Rng rng(111);
  for (int i = 0; i < 200; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = random_rep(rng, 4, 3, alpha);
    ASSERT_TRUE(is_minimal(rep));
    std::vector<double> r1(4), r2(4);
    for (std::size_t s = 0; s < 4; ++s) {
      r1[s] = uniform(rng, 0.05, 1.0);
      r2[s] = pick(rng, 0, 1) ? r1[s] : uniform(rng, 0.05, 1.0);
      if (pick(rng, 0, 1)) r1[s] = -r1[s];
      if (pick(rng, 0, 1)) r2[s] = -r2[s];
    }
    auto scaled = [&](const std::vector<double>& r) {
      Matrix g = rep.values();
      for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t s = 0; s < 4; ++s) g(t, s) *= r[s];
      }
      return make_rep(alpha, g, rep.space().weights());
    };
    double gap = 0.0;
    for (std::size_t s = 0; s < 4; ++s) gap = std::max(gap, std::fabs(std::fabs(r1[s]) - std::fabs(r2[s])));
    EXPECT_EQ(same_process(scaled(r1), scaled(r2)), gap < 1e-9);
  }
}

TEST(CommonComponent, SelfOverlap) {
  Rng rng(112);
  auto rep = random_clustered_rep(rng, 6, 3, 3, 1.4);
  auto c = common_component(rep, rep);
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(same_process(*c, rep));
}

TEST(CommonComponent, DisjointDirections) {
  auto a = make_rep(1.0, Matrix{{1.0}, {0.0}});
  auto b = make_rep(1.0, Matrix{{0.0}, {1.0}});
  EXPECT_FALSE(common_component(a, b).has_value());
}

TEST(CommonComponent, PartialOverlapTakesMinimum) {
  auto a = make_rep(1.0, Matrix{{1.0, 1.0}, {0.0, 1.0}}, {1.0, 1.0});
  auto b = make_rep(1.0, Matrix{{1.0, 0.0}, {0.0, 1.0}}, {3.0, 2.0});
  auto c = common_component(a, b);
  ASSERT_TRUE(c.has_value());
  auto m = canonicalize(*c);
  ASSERT_EQ(m.atoms.size(), 1u);
  EXPECT_EQ(m.atoms[0].direction, (std::vector<double>{1.0, 0.0}));
  EXPECT_NEAR(m.atoms[0].mass, 1.0, 1e-12);
  EXPECT_NO_THROW(recover_weights(a, *c));
  EXPECT_NO_THROW(recover_weights(b, *c));
}

TEST(CommonComponent, IsAComponentOfBoth) {
  Rng rng(113);
  for (int i = 0; i < 100; ++i) {
    const double alpha = uniform(rng, 0.3, 1.9);
    auto base = random_clustered_rep(rng, 6, 2, 4, alpha);
    // two reps that draw different subsets and weights from the same directions
    auto w = block_weights(rng, base, 2);
    auto parts = make_components(base, w);
    if (parts[0].point_count() == 0 || parts[1].point_count() == 0) continue;
    auto c = common_component(parts[0], parts[1]);
    if (!c) continue;
    EXPECT_NO_THROW(recover_weights(parts[0], *c));
    EXPECT_NO_THROW(recover_weights(parts[1], *c));
  }
}

TEST(Increments, TwoTimes) {
  auto rep = independent_increments_rep(Alpha(1.0), {1.0, 2.0}, {1.0, 2.0});
  EXPECT_EQ(rep.values(), (Matrix{{1.0, 0.0}, {1.0, 1.0}}));
  EXPECT_EQ(rep.space().weights(), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(rep.space().labels(), (std::vector<std::string>{"(0,1]", "(1,2]"}));
  EXPECT_TRUE(has_independent_increments(rep));
}

TEST(Increments, FlatStretchDropsPoint) {
  auto rep = independent_increments_rep(Alpha(1.5), {1.0, 2.0, 3.0}, {1.0, 1.0, 4.0});
  EXPECT_EQ(rep.point_count(), 2u);
  EXPECT_EQ(rep.space().labels(), (std::vector<std::string>{"(0,1]", "(2,3]"}));
}

TEST(Increments, NormsFollowControlFunction) {
  Rng rng(114);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = pick(rng, 1, 6);
    std::vector<double> times, m;
    double t = 0.0, level = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      t += uniform(rng, 0.1, 2.0);
      if (pick(rng, 0, 3)) level += uniform(rng, 0.1, 3.0);
      times.push_back(t);
      m.push_back(level);
    }
    if (level == 0.0) continue;
    const double alpha = uniform(rng, 0.3, 1.9);
    auto rep = independent_increments_rep(Alpha(alpha), times, m);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      EXPECT_NEAR(oracle_scale(rep, e), m[j], 1e-12 * (1 + m[j]));
    }
    EXPECT_TRUE(has_independent_increments(rep));
  }
}

TEST(Increments, ComponentsKeepIndependentIncrements) {
  Rng rng(115);
  auto rep = independent_increments_rep(Alpha(1.2), {0.5, 1.0, 2.0, 4.0}, {1.0, 1.5, 3.0, 3.5});
  for (int i = 0; i < 20; ++i) {
    auto comps = make_components(rep, block_weights(rng, rep, 3));
    for (const auto& c : comps) EXPECT_TRUE(has_independent_increments(c));
  }
}

TEST(Increments, OverlappingIncrements) {
  EXPECT_FALSE(has_independent_increments(make_rep(1.0, Matrix{{1.0, 1.0}, {2.0, 0.0}})));
}

TEST(Increments, RejectsNonMonotoneInput) {
  EXPECT_EQ(code_of([] { independent_increments_rep(Alpha(1.0), {1.0, 1.0}, {1.0, 2.0}); }), ErrorCode::NonMonotone);
  EXPECT_EQ(code_of([] { independent_increments_rep(Alpha(1.0), {1.0, 2.0}, {2.0, 1.0}); }), ErrorCode::NonMonotone);
  EXPECT_EQ(code_of([] { independent_increments_rep(Alpha(1.0), {0.0, 2.0}, {1.0, 2.0}); }), ErrorCode::NonMonotone);
}
