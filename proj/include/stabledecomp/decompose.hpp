#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "stabledecomp/core.hpp"

namespace stabledecomp {

/// Partition of a finite point space. Blocks hold point indices in
/// increasing order; blocks are ordered by their smallest point.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<std::vector<std::size_t>> blocks, const FinitePointSpace& space) : blocks_(std::move(blocks)) {
    block_of_.assign(space.size(), static_cast<std::size_t>(-1));
    for (auto& b : blocks_) {
      if (b.empty()) throw Error(ErrorCode::SchemaError, "empty partition block");
      std::sort(b.begin(), b.end());
    }
    std::sort(blocks_.begin(), blocks_.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      for (std::size_t s : blocks_[i]) {
        if (s >= space.size() || block_of_[s] != static_cast<std::size_t>(-1)) {
          throw Error(ErrorCode::SchemaError, "partition blocks overlap or exceed the space");
        }
        block_of_[s] = i;
      }
    }
    for (std::size_t s = 0; s < space.size(); ++s) {
      if (block_of_[s] == static_cast<std::size_t>(-1)) {
        throw Error(ErrorCode::SchemaError, "partition does not cover " + space.label(s));
      }
    }
    labels_.reserve(blocks_.size());
    for (const auto& b : blocks_) {
      std::vector<std::string> names;
      for (std::size_t s : b) names.push_back(space.label(s));
      labels_.push_back(std::move(names));
    }
  }

  std::size_t size() const noexcept { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  const std::vector<std::vector<std::string>>& labeled_blocks() const noexcept { return labels_; }
  std::size_t block_of(std::size_t point) const { return block_of_[point]; }

  friend bool operator==(const Partition& a, const Partition& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<std::vector<std::string>> labels_;
};

/// Component weights: `r[k][s]` is the weight of component k at point s.
struct WeightFamily {
  std::vector<std::vector<double>> r;
  std::size_t k() const noexcept { return r.size(); }
};

inline constexpr double kWeightNormTolerance = 1e-9;

/// Throws WeightNormViolation unless sum_k |r_k(s)|^alpha = 1 at every point.
inline void check_weight_norms(const WeightFamily& w, const FinitePointSpace& space, double alpha) {
  for (const auto& rk : w.r) {
    if (rk.size() != space.size()) throw Error(ErrorCode::DimensionMismatch, "weight vector length");
  }
  for (std::size_t s = 0; s < space.size(); ++s) {
    double sum = 0.0;
    for (const auto& rk : w.r) sum += std::pow(std::abs(rk[s]), alpha);
    if (std::abs(sum - 1.0) > kWeightNormTolerance) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " (sum %.12g)", sum);
      throw Error(ErrorCode::WeightNormViolation, space.label(s) + buf);
    }
  }
}

/// Points share a block iff their columns are proportional (up to sign).
inline Partition ratio_partition(const SpectralRep& rep) {
  auto joint = detail::joint_measure({&rep});
  std::vector<std::vector<std::size_t>> blocks(joint.keys.size());
  for (std::size_t s = 0; s < rep.point_count(); ++s) blocks[joint.cluster_of_point[0][s]].push_back(s);
  return Partition(std::move(blocks), rep.space());
}

inline bool is_minimal(const SpectralRep& rep) { return ratio_partition(rep).size() == rep.point_count(); }

struct Minimalization {
  SpectralRep rep;
  Partition collapse;  // block i of `collapse` became point i of `rep`
};

/// Collapses every proportionality class into one unit-weight point carrying
/// the class's canonical atom.
inline Minimalization minimalize(const SpectralRep& rep) {
  auto joint = detail::joint_measure({&rep});
  Partition part = [&] {
    std::vector<std::vector<std::size_t>> blocks(joint.keys.size());
    for (std::size_t s = 0; s < rep.point_count(); ++s) blocks[joint.cluster_of_point[0][s]].push_back(s);
    return Partition(std::move(blocks), rep.space());
  }();
  std::vector<std::vector<double>> dirs;
  std::vector<double> masses;
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < part.size(); ++b) {
    const std::size_t cluster = joint.cluster_of_point[0][part.blocks()[b].front()];
    dirs.push_back(detail::direction_from_key(joint.keys[cluster]));
    masses.push_back(joint.mass[cluster][0]);
    std::string name;
    for (const auto& l : part.labeled_blocks()[b]) name += (name.empty() ? "" : "+") + l;
    labels.push_back(std::move(name));
  }
  return {detail::rep_from_atoms(rep.alpha(), rep.times(), dirs, masses, std::move(labels)), std::move(part)};
}

/// Component k has columns r_k(s) f(s) on the support of r_k.
inline std::vector<SpectralRep> make_components(const SpectralRep& rep, const WeightFamily& w) {
  check_weight_norms(w, rep.space(), rep.alpha().value());
  std::vector<SpectralRep> out;
  out.reserve(w.k());
  for (const auto& rk : w.r) {
    std::vector<std::size_t> support;
    for (std::size_t s = 0; s < rep.point_count(); ++s) {
      if (rk[s] != 0.0) support.push_back(s);
    }
    std::vector<std::string> labels;
    std::vector<double> weights;
    Matrix values(rep.time_count(), support.size());
    for (std::size_t j = 0; j < support.size(); ++j) {
      const std::size_t s = support[j];
      labels.push_back(rep.space().label(s));
      weights.push_back(rep.space().weight(s));
      for (std::size_t t = 0; t < rep.time_count(); ++t) values(t, j) = rk[s] * rep.values()(t, s);
    }
    out.emplace_back(rep.alpha(), FinitePointSpace(std::move(labels), std::move(weights)), rep.times(),
                     std::move(values));
  }
  return out;
}

inline bool verify_decomposition(const SpectralRep& rep, const std::vector<SpectralRep>& components,
                                 double tol = kDefaultTolerance) {
  if (components.empty()) return rep.point_count() == 0;
  for (const auto& c : components) {
    if (c.alpha() != rep.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
    if (c.times() != rep.times()) throw Error(ErrorCode::TimesMismatch, "");
  }
  return same_process(rep, disjoint_union(components), tol);
}

namespace detail {

inline std::string format_direction(const DirectionKey& key) {
  auto dir = direction_from_key(key);
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < dir.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", dir[i]);
    out += (i ? "," : "");
    out += buf;
  }
  return out + ")";
}

}  // namespace detail

/// Unique nonnegative block-constant weights r with component =d r * X.
/// Throws NotAComponent when the component's canonical measure is not
/// dominated by the process's.
inline std::vector<double> recover_weights(const SpectralRep& rep, const SpectralRep& component,
                                           double tol = kDefaultTolerance) {
  if (component.alpha() != rep.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
  if (component.times() != rep.times()) throw Error(ErrorCode::TimesMismatch, "");
  const double alpha = rep.alpha().value();
  auto joint = detail::joint_measure({&rep, &component});
  std::vector<double> ratio(joint.keys.size(), 0.0);
  for (std::size_t c = 0; c < joint.keys.size(); ++c) {
    const double mx = joint.mass[c][0];
    const double mz = joint.mass[c][1];
    if (mz == 0.0) continue;
    if (mx == 0.0 || mz > mx * (1.0 + tol)) {
      throw Error(ErrorCode::NotAComponent, detail::format_direction(joint.keys[c]));
    }
    ratio[c] = std::pow(std::min(1.0, mz / mx), 1.0 / alpha);
  }
  std::vector<double> r(rep.point_count());
  for (std::size_t s = 0; s < rep.point_count(); ++s) r[s] = ratio[joint.cluster_of_point[0][s]];
  return r;
}

/// r_c = (1 - r^alpha)^(1/alpha), with small negative bases clamped to zero.
inline std::vector<double> complement_weights(const std::vector<double>& r, double alpha) {
  std::vector<double> out(r.size());
  for (std::size_t s = 0; s < r.size(); ++s) {
    double base = 1.0 - std::pow(std::abs(r[s]), alpha);
    if (base < 0.0 && base > -1e-12) base = 0.0;
    if (base < 0.0) throw Error(ErrorCode::WeightNormViolation, "weight above one at index " + std::to_string(s));
    out[s] = std::pow(base, 1.0 / alpha);
  }
  return out;
}

/// Maximal common component: mass min(m_A, m_B) at every shared direction.
inline std::optional<SpectralRep> common_component(const SpectralRep& a, const SpectralRep& b,
                                                   double tol = kDefaultTolerance) {
  if (a.alpha() != b.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
  if (a.times() != b.times()) throw Error(ErrorCode::TimesMismatch, "");
  auto joint = detail::joint_measure({&a, &b});
  const double floor = tol * std::max(joint.totals[0], joint.totals[1]);
  std::vector<std::vector<double>> dirs;
  std::vector<double> masses;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < joint.keys.size(); ++c) {
    const double m = std::min(joint.mass[c][0], joint.mass[c][1]);
    if (m <= floor) continue;
    dirs.push_back(detail::direction_from_key(joint.keys[c]));
    masses.push_back(m);
    labels.push_back("common" + std::to_string(labels.size()));
  }
  if (dirs.empty()) return std::nullopt;
  return detail::rep_from_atoms(a.alpha(), a.times(), dirs, masses, std::move(labels));
}

namespace detail {
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace detail

/// Process with independent increments and ||X_t||^alpha = m(t): f_t is the
/// indicator of [0, t] on the increment points (t_{i-1}, t_i].
inline SpectralRep independent_increments_rep(Alpha alpha, const std::vector<double>& times,
                                              const std::vector<double>& m) {
  if (times.size() != m.size()) throw Error(ErrorCode::DimensionMismatch, "times vs m");
  double prev_t = 0.0;
  double prev_m = 0.0;
  std::vector<std::string> time_labels;
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::vector<std::size_t> first_time;  // first time index covered by each kept increment
  for (std::size_t i = 0; i < times.size(); ++i) {
    const bool leading_zero = (i == 0 && times[i] == 0.0);
    if (!(times[i] > prev_t) && !leading_zero) {
      throw Error(ErrorCode::NonMonotone, "times at " + detail::format_number(times[i]));
    }
    if (!(m[i] >= prev_m) || (leading_zero && m[i] != 0.0)) {
      throw Error(ErrorCode::NonMonotone, "m at " + detail::format_number(times[i]));
    }
    time_labels.push_back(detail::format_number(times[i]));
    if (m[i] > prev_m) {
      labels.push_back("(" + detail::format_number(prev_t) + "," + detail::format_number(times[i]) + "]");
      weights.push_back(m[i] - prev_m);
      first_time.push_back(i);
    }
    prev_t = times[i];
    prev_m = m[i];
  }
  Matrix values(times.size(), labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    for (std::size_t t = first_time[j]; t < times.size(); ++t) values(t, j) = 1.0;
  }
  return SpectralRep(alpha, FinitePointSpace(std::move(labels), std::move(weights)), std::move(time_labels),
                     std::move(values));
}

/// Increments f_{t_i} - f_{t_{i-1}} (with f_{t_0} = 0) have pairwise disjoint
/// supports, in the declared time order.
inline bool has_independent_increments(const SpectralRep& rep) {
  const Matrix& f = rep.values();
  for (std::size_t s = 0; s < rep.point_count(); ++s) {
    double scale = 0.0;
    for (std::size_t t = 0; t < rep.time_count(); ++t) scale = std::max(scale, std::abs(f(t, s)));
    int jumps = 0;
    double prev = 0.0;
    for (std::size_t t = 0; t < rep.time_count(); ++t) {
      if (std::abs(f(t, s) - prev) > 1e-12 * scale) ++jumps;
      prev = f(t, s);
    }
    if (jumps > 1) return false;
  }
  return true;
}

}  // namespace stabledecomp
