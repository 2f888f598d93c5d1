#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "stabledecomp/core.hpp"
#include "stabledecomp/maxstable.hpp"

namespace stabledecomp {

struct SimulationConfig {
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::size_t chunk_size = 4096;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// n_samples x |T| realizations, row-major.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> times;
  std::uint64_t rep_hash = 0;
  SimulationConfig config;

  double operator()(std::size_t i, std::size_t t) const { return data[i * cols + t]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::vector<double> column(std::size_t t) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = data[i * cols + t];
    return out;
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void number(double v) { bytes(&v, sizeof v); }
  void text(const std::string& s) {
    bytes(s.data(), s.size());
    bytes("\0", 1);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <class Rep>
std::uint64_t hash_rep(const Rep& rep, double alpha) {
  Fnv1a h;
  h.number(alpha);
  for (const auto& l : rep.space().labels()) h.text(l);
  for (double w : rep.space().weights()) h.number(w);
  for (const auto& t : rep.times()) h.text(t);
  for (double v : rep.values().data()) h.number(v);
  return h.value();
}

// Runs body(first, last) over [0, n) in chunks; the split does not affect results.
inline void for_each_chunk(std::size_t n, const SimulationConfig& cfg,
                           const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk_size);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, chunks)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) body(c * chunk, std::min(n, (c + 1) * chunk));
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
}

}  // namespace detail

/// Uniform on (0, 1) keyed by (seed, sample, point, stream).
inline double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t point, std::uint64_t stream) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ sample);
  h = detail::splitmix64(h ^ point);
  h = detail::splitmix64(h ^ stream);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Chambers-Mallows-Stuck draw of a standard symmetric alpha-stable variable,
/// E exp(i theta Z) = exp(-|theta|^alpha). alpha = 1 gives tan(V), the Cauchy law.
inline double cms_symmetric(double alpha, double u_angle, double u_exp) {
  const double v = std::numbers::pi * (u_angle - 0.5);
  const double w = -std::log(u_exp);
  if (alpha == 1.0) return std::tan(v);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

/// X_t = sum_s f_t(s) mu_s^(1/alpha) Z_s with independent standard SaS Z_s.
inline SampleMatrix sample_sas(const SpectralRep& rep, const SimulationConfig& cfg) {
  const double alpha = rep.alpha().value();
  SampleMatrix out{cfg.n_samples, rep.time_count(), std::vector<double>(cfg.n_samples * rep.time_count(), 0.0),
                   rep.times(), detail::hash_rep(rep, alpha), cfg};
  std::vector<double> scale(rep.point_count());
  for (std::size_t s = 0; s < rep.point_count(); ++s) scale[s] = std::pow(rep.space().weight(s), 1.0 / alpha);
  detail::for_each_chunk(cfg.n_samples, cfg, [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      double* row = out.data.data() + i * out.cols;
      for (std::size_t s = 0; s < rep.point_count(); ++s) {
        const double z = scale[s] * cms_symmetric(alpha, counter_uniform(cfg.seed, i, s, 0),
                                                  counter_uniform(cfg.seed, i, s, 1));
        for (std::size_t t = 0; t < out.cols; ++t) row[t] += rep.values()(t, s) * z;
      }
    }
  });
  return out;
}

/// Y_t = max_s f_t(s) mu_s^(1/alpha) E_s^(-1/alpha) with independent standard
/// exponentials E_s; exact for every sample size.
inline SampleMatrix sample_frechet(const MaxStableRep& rep, const SimulationConfig& cfg) {
  const double alpha = rep.alpha();
  SampleMatrix out{cfg.n_samples, rep.time_count(), std::vector<double>(cfg.n_samples * rep.time_count(), 0.0),
                   rep.times(), detail::hash_rep(rep, alpha), cfg};
  std::vector<double> scale(rep.point_count());
  for (std::size_t s = 0; s < rep.point_count(); ++s) scale[s] = std::pow(rep.space().weight(s), 1.0 / alpha);
  detail::for_each_chunk(cfg.n_samples, cfg, [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      double* row = out.data.data() + i * out.cols;
      for (std::size_t s = 0; s < rep.point_count(); ++s) {
        const double e = -std::log(counter_uniform(cfg.seed, i, s, 0));
        const double z = scale[s] * std::pow(e, -1.0 / alpha);
        for (std::size_t t = 0; t < out.cols; ++t) row[t] = std::max(row[t], rep.values()(t, s) * z);
      }
    }
  });
  return out;
}

/// P(sqrt(n) D_n > lambda) in the large-n limit.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      sum += std::exp(-j * j * pi * pi / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

namespace detail {
// Small-sample correction of the asymptotic distribution.
inline double ks_lambda(double n_eff, double d) {
  const double r = std::sqrt(n_eff);
  return (r + 0.12 + 0.11 / r) * d;
}
}  // namespace detail

inline KsResult ks_one_sample(std::vector<double> data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw Error(ErrorCode::EmptySample, "");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_survival(detail::ks_lambda(n, d))};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, kolmogorov_survival(detail::ks_lambda(na * nb / (na + nb), d))};
}

struct CfProbe {
  std::vector<double> a;
  double empirical = 0.0;
  double theoretical = 0.0;
  double deviation = 0.0;
  bool flagged = false;
};

struct CfReport {
  std::size_t n = 0;
  double envelope = 0.0;
  double level = 0.0;
  std::vector<CfProbe> probes;
  std::size_t flagged = 0;
  bool pass = false;
};

/// Compares |mean exp(i a.X)| with exp(-scale_functional(rep, a)) at each
/// probe. A probe is flagged outside 4/sqrt(n); the report passes when the
/// flagged fraction does not exceed `level`.
inline CfReport check_empirical_cf(const SampleMatrix& samples, const SpectralRep& rep,
                                   const std::vector<std::vector<double>>& probes, double level) {
  if (samples.rows == 0) throw Error(ErrorCode::EmptySample, "");
  if (samples.cols != rep.time_count()) throw Error(ErrorCode::DimensionMismatch, "samples vs representation times");
  CfReport report;
  report.n = samples.rows;
  report.level = level;
  report.envelope = 4.0 / std::sqrt(static_cast<double>(samples.rows));
  for (const auto& a : probes) {
    if (a.size() != samples.cols) throw Error(ErrorCode::DimensionMismatch, "probe length");
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < samples.rows; ++i) {
      double phase = 0.0;
      for (std::size_t t = 0; t < samples.cols; ++t) phase += a[t] * samples(i, t);
      re += std::cos(phase);
      im += std::sin(phase);
    }
    CfProbe p;
    p.a = a;
    p.empirical = std::hypot(re, im) / static_cast<double>(samples.rows);
    p.theoretical = std::exp(-scale_functional(rep, a));
    p.deviation = std::abs(p.empirical - p.theoretical);
    p.flagged = p.deviation > report.envelope;
    report.flagged += p.flagged ? 1 : 0;
    report.probes.push_back(std::move(p));
  }
  report.pass = static_cast<double>(report.flagged) <= level * static_cast<double>(probes.size());
  return report;
}

struct CdfProbe {
  std::vector<std::size_t> rows;
  std::vector<double> y;
  double empirical = 0.0;
  double theoretical = 0.0;
  double deviation = 0.0;
  double envelope = 0.0;
  bool flagged = false;
};

struct MarginalKs {
  std::string time;
  KsResult ks;
  bool pass = false;
};

struct CdfReport {
  std::size_t n = 0;
  double level = 0.0;
  std::vector<CdfProbe> probes;
  std::vector<MarginalKs> marginals;
  bool pass = false;
};

/// Marginal law P(Y_t <= y) = exp(-sigma_t^alpha y^-alpha).
inline double frechet_marginal_cdf(const MaxStableRep& rep, std::size_t row, double y) {
  if (y <= 0.0) {
    // a time whose spectral row vanishes is identically zero
    for (std::size_t s = 0; s < rep.point_count(); ++s) {
      if (rep.values()(row, s) != 0.0) return 0.0;
    }
    return y == 0.0 ? 1.0 : 0.0;
  }
  const std::size_t rows[] = {row};
  const double ys[] = {y};
  return frechet_fdd_cdf(rep, rows, ys);
}

/// Joint empirical CDF at each probe against the exact value, with a
/// Bonferroni-corrected binomial envelope, plus a one-sample KS test of every
/// marginal against the exact Frechet law.
inline CdfReport check_empirical_cdf(const SampleMatrix& samples, const MaxStableRep& rep,
                                     const std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>>& probes,
                                     double level) {
  if (samples.rows == 0) throw Error(ErrorCode::EmptySample, "");
  if (samples.cols != rep.time_count()) throw Error(ErrorCode::DimensionMismatch, "samples vs representation times");
  CdfReport report;
  report.n = samples.rows;
  report.level = level;
  const double n = static_cast<double>(samples.rows);
  const double z = boost::math::quantile(boost::math::normal(),
                                         1.0 - level / (2.0 * static_cast<double>(std::max<std::size_t>(1, probes.size()))));
  bool ok = true;
  for (const auto& [rows, y] : probes) {
    CdfProbe p;
    p.rows = rows;
    p.y = y;
    p.theoretical = frechet_fdd_cdf(rep, rows, y);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.rows; ++i) {
      bool below = true;
      for (std::size_t j = 0; j < rows.size() && below; ++j) below = samples(i, rows[j]) <= y[j];
      hits += below ? 1 : 0;
    }
    p.empirical = static_cast<double>(hits) / n;
    p.deviation = std::abs(p.empirical - p.theoretical);
    p.envelope = z * std::sqrt(p.theoretical * (1.0 - p.theoretical) / n) + 1.0 / n;
    p.flagged = p.deviation > p.envelope;
    ok = ok && !p.flagged;
    report.probes.push_back(std::move(p));
  }
  for (std::size_t t = 0; t < samples.cols; ++t) {
    MarginalKs m;
    m.time = rep.times()[t];
    m.ks = ks_one_sample(samples.column(t), [&](double y) { return frechet_marginal_cdf(rep, t, y); });
    m.pass = m.ks.p_value >= level;
    ok = ok && m.pass;
    report.marginals.push_back(std::move(m));
  }
  report.pass = ok;
  return report;
}

}  // namespace stabledecomp
