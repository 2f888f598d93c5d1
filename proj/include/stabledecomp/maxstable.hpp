#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stabledecomp/core.hpp"
#include "stabledecomp/decompose.hpp"
#include "stabledecomp/stationary.hpp"

namespace stabledecomp {

/// Extremal representation Y_t = max-integral of f_t over a Frechet random
/// sup-measure. Any alpha > 0 is allowed; entries are nonnegative.
class MaxStableRep {
 public:
  MaxStableRep(double alpha, FinitePointSpace space, std::vector<std::string> times, Matrix values)
      : alpha_(alpha), space_(std::move(space)), times_(std::move(times)), values_(std::move(values)) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw Error(ErrorCode::AlphaOutOfRange, std::to_string(alpha_));
    detail::check_rep_body(space_, times_, values_);
    for (std::size_t t = 0; t < values_.rows(); ++t) {
      for (std::size_t s = 0; s < values_.cols(); ++s) {
        if (values_(t, s) < 0.0) throw Error(ErrorCode::NegativeEntry, times_[t] + "/" + space_.label(s));
      }
    }
  }

  double alpha() const noexcept { return alpha_; }
  const FinitePointSpace& space() const noexcept { return space_; }
  const std::vector<std::string>& times() const noexcept { return times_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t point_count() const noexcept { return space_.size(); }
  std::size_t time_count() const noexcept { return times_.size(); }

 private:
  double alpha_;
  FinitePointSpace space_;
  std::vector<std::string> times_;
  Matrix values_;
};

/// P(Y_{t_i} <= y_i for all i) = exp(-sum_s max_i (f_{t_i}(s) / y_i)^alpha mu_s).
/// `rows` are time indices into the representation.
inline double frechet_fdd_cdf(const MaxStableRep& rep, std::span<const std::size_t> rows, std::span<const double> y) {
  if (rows.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "times vs thresholds");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(ErrorCode::NonPositiveThreshold, std::to_string(y[i]));
    if (rows[i] >= rep.time_count()) throw Error(ErrorCode::DimensionMismatch, "time index out of range");
  }
  double exponent = 0.0;
  for (std::size_t s = 0; s < rep.point_count(); ++s) {
    double peak = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) peak = std::max(peak, rep.values()(rows[i], s) / y[i]);
    if (peak > 0.0) exponent += std::pow(peak, rep.alpha()) * rep.space().weight(s);
  }
  return std::exp(-exponent);
}

inline double frechet_fdd_cdf(const MaxStableRep& rep, const std::vector<std::string>& times,
                              std::span<const double> y) {
  std::vector<std::size_t> rows;
  for (const auto& t : times) {
    auto it = std::find(rep.times().begin(), rep.times().end(), t);
    if (it == rep.times().end()) throw Error(ErrorCode::DanglingLabel, t);
    rows.push_back(static_cast<std::size_t>(it - rep.times().begin()));
  }
  return frechet_fdd_cdf(rep, rows, y);
}

/// The Frechet process sharing this nonnegative spectral representation.
inline MaxStableRep associate(const SpectralRep& rep) {
  return MaxStableRep(rep.alpha().value(), rep.space(), rep.times(), rep.values());
}

/// The SaS process sharing this representation; requires alpha < 2.
inline SpectralRep deassociate(const MaxStableRep& rep) {
  return SpectralRep(Alpha(rep.alpha()), rep.space(), rep.times(), rep.values());
}

/// Y^alpha is 1-Frechet with spectral functions f^alpha.
inline MaxStableRep alpha_power_transform(const MaxStableRep& rep) {
  if (rep.alpha() == 1.0) return rep;
  Matrix values(rep.time_count(), rep.point_count());
  for (std::size_t t = 0; t < rep.time_count(); ++t) {
    for (std::size_t s = 0; s < rep.point_count(); ++s) values(t, s) = std::pow(rep.values()(t, s), rep.alpha());
  }
  return MaxStableRep(1.0, rep.space(), rep.times(), std::move(values));
}

namespace detail {

// Associated SaS representation; alpha >= 2 goes through the 1-Frechet transform.
inline SpectralRep bridge_to_sas(const MaxStableRep& rep) {
  return rep.alpha() < 2.0 ? deassociate(rep) : deassociate(alpha_power_transform(rep));
}

}  // namespace detail

inline bool max_same_process(const MaxStableRep& a, const MaxStableRep& b, double tol = kDefaultTolerance) {
  if (a.times() != b.times()) throw Error(ErrorCode::TimesMismatch, "");
  if (a.alpha() != b.alpha()) return false;
  return same_process(detail::bridge_to_sas(a), detail::bridge_to_sas(b), tol);
}

/// Representation of the pointwise maximum of independent processes.
inline MaxStableRep max_disjoint_union(const std::vector<MaxStableRep>& reps) {
  if (reps.empty()) throw Error(ErrorCode::DimensionMismatch, "empty union");
  const double alpha = reps.front().alpha();
  const auto& times = reps.front().times();
  std::size_t points = 0;
  for (const auto& r : reps) {
    if (r.alpha() != alpha) throw Error(ErrorCode::AlphaMismatch, "");
    if (r.times() != times) throw Error(ErrorCode::TimesMismatch, "");
    points += r.point_count();
  }
  std::vector<std::string> labels;
  std::vector<double> weights;
  Matrix values(times.size(), points);
  std::size_t col = 0;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    for (std::size_t s = 0; s < reps[k].point_count(); ++s, ++col) {
      labels.push_back(std::to_string(k) + "/" + reps[k].space().label(s));
      weights.push_back(reps[k].space().weight(s));
      for (std::size_t t = 0; t < times.size(); ++t) values(t, col) = reps[k].values()(t, s);
    }
  }
  return MaxStableRep(alpha, FinitePointSpace(std::move(labels), std::move(weights)), times, std::move(values));
}

inline bool verify_max_decomposition(const MaxStableRep& rep, const std::vector<MaxStableRep>& components,
                                     double tol = kDefaultTolerance) {
  if (components.empty()) return rep.point_count() == 0;
  for (const auto& c : components) {
    if (c.alpha() != rep.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
    if (c.times() != rep.times()) throw Error(ErrorCode::TimesMismatch, "");
  }
  return max_same_process(rep, max_disjoint_union(components), tol);
}

/// Components r_k f with r_k >= 0 and sum_k r_k^alpha = 1.
inline std::vector<MaxStableRep> make_max_components(const MaxStableRep& rep, const WeightFamily& w) {
  for (const auto& rk : w.r) {
    for (double v : rk) {
      if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "negative max-stable weight");
    }
  }
  check_weight_norms(w, rep.space(), rep.alpha());
  std::vector<MaxStableRep> out;
  for (const auto& rk : w.r) {
    std::vector<std::string> labels;
    std::vector<double> weights;
    std::vector<std::size_t> support;
    for (std::size_t s = 0; s < rep.point_count(); ++s) {
      if (rk[s] != 0.0) support.push_back(s);
    }
    Matrix values(rep.time_count(), support.size());
    for (std::size_t j = 0; j < support.size(); ++j) {
      labels.push_back(rep.space().label(support[j]));
      weights.push_back(rep.space().weight(support[j]));
      for (std::size_t t = 0; t < rep.time_count(); ++t) values(t, j) = rk[support[j]] * rep.values()(t, support[j]);
    }
    out.emplace_back(rep.alpha(), FinitePointSpace(std::move(labels), std::move(weights)), rep.times(),
                     std::move(values));
  }
  return out;
}

/// Unique block-constant weights in [0, 1] of a max-stable component.
inline std::vector<double> recover_max_weights(const MaxStableRep& rep, const MaxStableRep& component,
                                               double tol = kDefaultTolerance) {
  if (component.alpha() != rep.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
  auto r = recover_weights(detail::bridge_to_sas(rep), detail::bridge_to_sas(component), tol);
  if (rep.alpha() >= 2.0) {
    for (auto& v : r) v = std::pow(v, 1.0 / rep.alpha());
  }
  return r;
}

/// Flow representation of a stationary Frechet process: same formula as the
/// SaS case with a trivial cocycle.
inline MaxStableRep build_max_flow_rep(const StationaryProcessSpec& spec) {
  for (double v : spec.f0) {
    if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "f0");
  }
  for (const auto& c : spec.flow.generator_cocycles()) {
    for (int v : c) {
      if (v != 1) throw Error(ErrorCode::NegativeEntry, "cocycle must be trivial for max-stable flows");
    }
  }
  StationaryProcessSpec unit{1.0, spec.flow, spec.f0};
  for (auto& v : unit.f0) v = std::pow(v, spec.alpha);
  const SpectralRep one = build_flow_rep(unit);
  Matrix values(one.time_count(), one.point_count());
  for (std::size_t t = 0; t < one.time_count(); ++t) {
    for (std::size_t s = 0; s < one.point_count(); ++s) values(t, s) = std::pow(one.values()(t, s), 1.0 / spec.alpha);
  }
  return MaxStableRep(spec.alpha, one.space(), one.times(), std::move(values));
}

/// Indecomposability of a stationary Frechet process via the associated SaS
/// process (through the 1-Frechet transform when alpha >= 2).
inline IndecomposabilityVerdict is_indecomposable_max(const StationaryProcessSpec& spec,
                                                      double tol = kDefaultTolerance) {
  for (double v : spec.f0) {
    if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "f0");
  }
  for (const auto& c : spec.flow.generator_cocycles()) {
    for (int v : c) {
      if (v != 1) throw Error(ErrorCode::NegativeEntry, "cocycle must be trivial for max-stable flows");
    }
  }
  if (spec.alpha < 2.0) return is_indecomposable(spec, tol);
  StationaryProcessSpec unit{1.0, spec.flow, spec.f0};
  for (auto& v : unit.f0) v = std::pow(v, spec.alpha);
  return is_indecomposable(unit, tol);
}

}  // namespace stabledecomp
