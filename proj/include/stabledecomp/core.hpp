#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "stabledecomp/error.hpp"
#include "stabledecomp/matrix.hpp"

namespace stabledecomp {

/// Default relative tolerance for comparing canonical masses.
inline constexpr double kDefaultTolerance = 1e-9;

/// Direction coordinates are rounded to this many units per 1.0 (12 decimal
/// places) to form grouping keys.
inline constexpr double kKeyScale = 1e12;

/// Stability index of a symmetric stable law, restricted to the open interval (0, 2).
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0 && value < 2.0)) {
      throw Error(ErrorCode::AlphaOutOfRange, std::to_string(value));
    }
  }
  double value() const noexcept { return value_; }
  friend bool operator==(Alpha, Alpha) = default;

 private:
  double value_;
};

/// Finite control-measure space: labelled atoms with positive weights.
class FinitePointSpace {
 public:
  FinitePointSpace() = default;
  FinitePointSpace(std::vector<std::string> labels, std::vector<double> weights)
      : labels_(std::move(labels)), weights_(std::move(weights)) {
    if (labels_.size() != weights_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "point labels vs weights");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!seen.insert(labels_[i]).second) throw Error(ErrorCode::DuplicateLabel, labels_[i]);
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
        throw Error(ErrorCode::NonPositiveWeight, labels_[i]);
      }
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  friend bool operator==(const FinitePointSpace&, const FinitePointSpace&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<double> weights_;
};

namespace detail {

inline void check_rep_body(const FinitePointSpace& space, const std::vector<std::string>& times,
                           const Matrix& values) {
  if (values.rows() != times.size() || values.cols() != space.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "values are " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                    ", expected " + std::to_string(times.size()) + "x" + std::to_string(space.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& t : times) {
    if (!seen.insert(t).second) throw Error(ErrorCode::DuplicateLabel, t);
  }
  for (std::size_t s = 0; s < values.cols(); ++s) {
    bool nonzero = false;
    for (std::size_t t = 0; t < values.rows(); ++t) {
      if (!std::isfinite(values(t, s))) throw Error(ErrorCode::SchemaError, "non-finite value at " + space.label(s));
      if (values(t, s) != 0.0) nonzero = true;
    }
    if (!nonzero) throw Error(ErrorCode::ZeroColumn, space.label(s));
  }
}

}  // namespace detail

/// Finite spectral representation X_t = sum_s f_t(s) M(ds) of an SaS process.
/// Rows of `values()` are indexed by time, columns by point.
class SpectralRep {
 public:
  SpectralRep(Alpha alpha, FinitePointSpace space, std::vector<std::string> times, Matrix values)
      : alpha_(alpha), space_(std::move(space)), times_(std::move(times)), values_(std::move(values)) {
    detail::check_rep_body(space_, times_, values_);
  }

  Alpha alpha() const noexcept { return alpha_; }
  const FinitePointSpace& space() const noexcept { return space_; }
  const std::vector<std::string>& times() const noexcept { return times_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t point_count() const noexcept { return space_.size(); }
  std::size_t time_count() const noexcept { return times_.size(); }
  std::vector<double> column(std::size_t s) const { return values_.column(s); }

 private:
  Alpha alpha_;
  FinitePointSpace space_;
  std::vector<std::string> times_;
  Matrix values_;
};

/// Unvalidated input to `validate_rep`.
struct RepCandidate {
  double alpha = 1.0;
  std::vector<std::string> points;
  std::vector<double> mu;
  std::vector<std::string> times;
  Matrix f;
};

inline SpectralRep validate_rep(const RepCandidate& raw) {
  Alpha alpha(raw.alpha);
  return SpectralRep(alpha, FinitePointSpace(raw.points, raw.mu), raw.times, raw.f);
}

/// sum_s |sum_j a_j f_{t_j}(s)|^alpha mu_s, the exponent of the characteristic
/// function of (X_t) at `a`.
inline double scale_functional(const SpectralRep& rep, std::span<const double> a) {
  if (a.size() != rep.time_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "coefficient vector has " + std::to_string(a.size()) + " entries, expected " +
                    std::to_string(rep.time_count()));
  }
  const double alpha = rep.alpha().value();
  const Matrix& f = rep.values();
  double total = 0.0;
  for (std::size_t s = 0; s < rep.point_count(); ++s) {
    double combo = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) combo += a[t] * f(t, s);
    if (combo != 0.0) total += std::pow(std::abs(combo), alpha) * rep.space().weight(s);
  }
  return total;
}

using DirectionKey = std::vector<std::int64_t>;

struct Atom {
  std::vector<double> direction;
  DirectionKey key;
  double mass = 0.0;
};

/// Discrete symmetric spectral measure on antipodally identified unit
/// directions. Atoms are sorted by `key`.
struct CanonicalSpectralMeasure {
  double alpha = 1.0;
  std::vector<std::string> times;
  std::vector<Atom> atoms;
  double total_mass = 0.0;
};

namespace detail {

struct ColumnDirection {
  DirectionKey key;
  double norm = 0.0;
};

inline double euclidean_norm(std::span<const double> v) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double sq = 0.0;
  for (double x : v) sq += (x / scale) * (x / scale);
  return scale * std::sqrt(sq);
}

inline DirectionKey quantize(std::span<const double> column, double norm) {
  DirectionKey key(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) key[i] = std::llround(column[i] / norm * kKeyScale);
  auto first = std::find_if(key.begin(), key.end(), [](std::int64_t k) { return k != 0; });
  if (first != key.end() && *first < 0) {
    for (auto& k : key) k = -k;
  }
  return key;
}

inline std::vector<double> direction_from_key(const DirectionKey& key) {
  std::vector<double> dir(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) dir[i] = static_cast<double>(key[i]) / kKeyScale;
  const double norm = euclidean_norm(dir);
  for (auto& d : dir) d /= norm;
  return dir;
}

// Quantized unit direction of a nonzero column, with the first nonzero key
// coordinate positive. The key is moved to a fixed point of
// key -> quantize(direction_from_key(key)) so that rebuilding a column from
// its atom reproduces the same key.
inline ColumnDirection column_direction(std::span<const double> column) {
  ColumnDirection out;
  out.norm = euclidean_norm(column);
  out.key = quantize(column, out.norm);
  for (int iter = 0; iter < 4; ++iter) {
    auto dir = direction_from_key(out.key);
    auto next = quantize(dir, 1.0);
    if (next == out.key) break;
    out.key = std::move(next);
  }
  return out;
}

inline bool keys_adjacent(const DirectionKey& a, const DirectionKey& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1) return false;
  }
  return true;
}

struct KeyClustering {
  std::vector<std::size_t> cluster_of;       // per input key
  std::vector<DirectionKey> representatives;  // smallest key of each cluster, sorted
};

// Groups keys that are connected through chains of keys differing by at most
// one quantum per coordinate. The result does not depend on input order.
inline KeyClustering cluster_keys(const std::vector<DirectionKey>& keys) {
  const std::size_t n = keys.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<DirectionKey> uniq;
  std::vector<std::size_t> uid(n);
  for (std::size_t i : order) {
    if (uniq.empty() || uniq.back() != keys[i]) uniq.push_back(keys[i]);
    uid[i] = uniq.size() - 1;
  }

  std::vector<std::size_t> parent(uniq.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < uniq.size(); ++a) {
    for (std::size_t b = a + 1; b < uniq.size() && !uniq[b].empty() && uniq[b][0] <= uniq[a][0] + 1; ++b) {
      if (keys_adjacent(uniq[a], uniq[b])) {
        std::size_t ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }

  KeyClustering out;
  std::vector<std::size_t> cluster_of_root(uniq.size(), static_cast<std::size_t>(-1));
  std::vector<std::size_t> cluster_of_uniq(uniq.size());
  for (std::size_t u = 0; u < uniq.size(); ++u) {
    std::size_t r = find(u);
    if (cluster_of_root[r] == static_cast<std::size_t>(-1)) {
      cluster_of_root[r] = out.representatives.size();
      out.representatives.push_back(uniq[u]);
    }
    cluster_of_uniq[u] = cluster_of_root[r];
  }
  out.cluster_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cluster_of[i] = cluster_of_uniq[uid[i]];
  return out;
}

/// Canonical measures of several reps over one shared set of direction
/// clusters. `mass[c][k]` is the mass of source k at cluster c.
struct JointMeasure {
  std::vector<DirectionKey> keys;
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<std::size_t>> cluster_of_point;  // per source, per point
  std::vector<double> totals;                              // per source
};

inline JointMeasure joint_measure(const std::vector<const SpectralRep*>& reps) {
  std::vector<DirectionKey> keys;
  std::vector<double> masses;
  for (const SpectralRep* rep : reps) {
    const double alpha = rep->alpha().value();
    for (std::size_t s = 0; s < rep->point_count(); ++s) {
      auto col = rep->column(s);
      auto dir = column_direction(col);
      keys.push_back(std::move(dir.key));
      masses.push_back(rep->space().weight(s) * std::pow(dir.norm, alpha));
    }
  }
  KeyClustering clusters = cluster_keys(keys);
  JointMeasure out;
  out.keys = clusters.representatives;
  out.mass.assign(out.keys.size(), std::vector<double>(reps.size(), 0.0));
  out.totals.assign(reps.size(), 0.0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    out.cluster_of_point.emplace_back();
    for (std::size_t s = 0; s < reps[k]->point_count(); ++s, ++i) {
      out.mass[clusters.cluster_of[i]][k] += masses[i];
      out.totals[k] += masses[i];
      out.cluster_of_point[k].push_back(clusters.cluster_of[i]);
    }
  }
  return out;
}

inline SpectralRep rep_from_atoms(Alpha alpha, const std::vector<std::string>& times,
                                  const std::vector<std::vector<double>>& directions,
                                  const std::vector<double>& masses, std::vector<std::string> labels) {
  Matrix values(times.size(), directions.size());
  for (std::size_t a = 0; a < directions.size(); ++a) {
    const double amp = std::pow(masses[a], 1.0 / alpha.value());
    for (std::size_t t = 0; t < times.size(); ++t) values(t, a) = directions[a][t] * amp;
  }
  return SpectralRep(alpha, FinitePointSpace(std::move(labels), std::vector<double>(directions.size(), 1.0)),
                     times, std::move(values));
}

}  // namespace detail

/// Each column v_s contributes mass mu_s * |v_s|^alpha at the direction
/// +-v_s/|v_s|; masses with the same quantized direction key are summed.
inline CanonicalSpectralMeasure canonicalize(const SpectralRep& rep) {
  auto joint = detail::joint_measure({&rep});
  CanonicalSpectralMeasure out;
  out.alpha = rep.alpha().value();
  out.times = rep.times();
  out.atoms.reserve(joint.keys.size());
  for (std::size_t c = 0; c < joint.keys.size(); ++c) {
    out.atoms.push_back(Atom{detail::direction_from_key(joint.keys[c]), joint.keys[c], joint.mass[c][0]});
  }
  out.total_mass = joint.totals[0];
  return out;
}

/// Rebuilds a representation with one unit-weight point per atom.
inline SpectralRep rep_from_measure(const CanonicalSpectralMeasure& measure) {
  std::vector<std::vector<double>> dirs;
  std::vector<double> masses;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < measure.atoms.size(); ++i) {
    dirs.push_back(measure.atoms[i].direction);
    masses.push_back(measure.atoms[i].mass);
    labels.push_back("atom" + std::to_string(i));
  }
  return detail::rep_from_atoms(Alpha(measure.alpha), measure.times, dirs, masses, std::move(labels));
}

/// Equality in finite-dimensional distributions, decided on canonical measures.
inline bool same_process(const SpectralRep& a, const SpectralRep& b, double tol = kDefaultTolerance) {
  if (a.times() != b.times()) throw Error(ErrorCode::TimesMismatch, "");
  if (a.alpha() != b.alpha()) return false;
  auto joint = detail::joint_measure({&a, &b});
  const double scale = std::max(joint.totals[0], joint.totals[1]);
  for (const auto& m : joint.mass) {
    if (std::abs(m[0] - m[1]) > tol * scale) return false;
  }
  return true;
}

/// Representation of the sum of independent processes. Labels become "k/label".
inline SpectralRep disjoint_union(const std::vector<SpectralRep>& reps) {
  if (reps.empty()) throw Error(ErrorCode::DimensionMismatch, "empty union");
  const Alpha alpha = reps.front().alpha();
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
    const auto& r = reps[k];
    for (std::size_t s = 0; s < r.point_count(); ++s, ++col) {
      labels.push_back(std::to_string(k) + "/" + r.space().label(s));
      weights.push_back(r.space().weight(s));
      for (std::size_t t = 0; t < times.size(); ++t) values(t, col) = r.values()(t, s);
    }
  }
  return SpectralRep(alpha, FinitePointSpace(std::move(labels), std::move(weights)), times, std::move(values));
}

/// True when `component` has the law of c * X for some constant c >= 0.
inline bool is_trivial_component(const SpectralRep& process, const SpectralRep& component,
                                 double tol = kDefaultTolerance) {
  if (process.times() != component.times()) throw Error(ErrorCode::TimesMismatch, "");
  if (process.alpha() != component.alpha()) throw Error(ErrorCode::AlphaMismatch, "");
  auto joint = detail::joint_measure({&process, &component});
  if (joint.totals[1] == 0.0) return true;
  if (joint.totals[0] == 0.0) return false;
  const double ratio = joint.totals[1] / joint.totals[0];
  for (const auto& m : joint.mass) {
    if (std::abs(m[1] - ratio * m[0]) > tol * joint.totals[1]) return false;
  }
  return true;
}

}  // namespace stabledecomp
