#pragma once

#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "stabledecomp/core.hpp"
#include "stabledecomp/decompose.hpp"

namespace stabledecomp {

/// Finite torus Z_{m_1} x ... x Z_{m_d}. Elements are indexed in mixed radix
/// with the last coordinate fastest. Labels are "i" for d = 1 and "i,j,..."
/// otherwise.
class Torus {
 public:
  Torus() = default;
  explicit Torus(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw Error(ErrorCode::InvalidFlow, "torus needs at least one dimension");
    size_ = 1;
    for (int m : dims_) {
      if (m < 1) throw Error(ErrorCode::InvalidFlow, "torus dimension must be positive");
      size_ *= static_cast<std::size_t>(m);
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<int>& dims() const noexcept { return dims_; }

  std::vector<int> coords(std::size_t index) const {
    std::vector<int> c(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
      c[i] = static_cast<int>(index % static_cast<std::size_t>(dims_[i]));
      index /= static_cast<std::size_t>(dims_[i]);
    }
    return c;
  }

  std::size_t index(const std::vector<int>& c) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      const int m = dims_[i];
      idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(((c[i] % m) + m) % m);
    }
    return idx;
  }

  std::size_t add(std::size_t a, std::size_t b) const {
    auto ca = coords(a);
    auto cb = coords(b);
    for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
    return index(ca);
  }

  /// a + e_g
  std::size_t shift(std::size_t a, std::size_t g) const {
    auto c = coords(a);
    c[g] += 1;
    return index(c);
  }

  std::string label(std::size_t index) const {
    auto c = coords(index);
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "," : "") + std::to_string(c[i]);
    return out;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(label(i));
    return out;
  }

  friend bool operator==(const Torus&, const Torus&) = default;

 private:
  std::vector<int> dims_;
  std::size_t size_ = 0;
};

/// A time list recognised as a full torus: `element[row]` is the torus index
/// of row `row`, `row_of` the inverse.
struct TorusIndex {
  Torus torus;
  std::vector<std::size_t> element;
  std::vector<std::size_t> row_of;
};

inline TorusIndex parse_torus_index(const std::vector<std::string>& times) {
  if (times.empty()) throw Error(ErrorCode::NotATorusIndex, "empty index set");
  std::vector<std::vector<int>> coords;
  std::size_t arity = 0;
  for (const auto& label : times) {
    std::vector<int> c;
    std::size_t pos = 0;
    while (true) {
      std::size_t end = label.find(',', pos);
      if (end == std::string::npos) end = label.size();
      int v = -1;
      auto res = std::from_chars(label.data() + pos, label.data() + end, v);
      if (res.ec != std::errc() || res.ptr != label.data() + end || v < 0) {
        throw Error(ErrorCode::NotATorusIndex, label);
      }
      c.push_back(v);
      if (end == label.size()) break;
      pos = end + 1;
    }
    if (arity == 0) arity = c.size();
    if (c.size() != arity) throw Error(ErrorCode::NotATorusIndex, label);
    coords.push_back(std::move(c));
  }
  std::vector<int> dims(arity, 0);
  for (const auto& c : coords) {
    for (std::size_t i = 0; i < arity; ++i) dims[i] = std::max(dims[i], c[i] + 1);
  }
  TorusIndex out{Torus(dims), {}, {}};
  if (out.torus.size() != times.size()) throw Error(ErrorCode::NotATorusIndex, "index set is not a full torus");
  out.row_of.assign(out.torus.size(), static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < coords.size(); ++r) {
    const std::size_t e = out.torus.index(coords[r]);
    if (out.row_of[e] != static_cast<std::size_t>(-1)) throw Error(ErrorCode::NotATorusIndex, times[r]);
    out.row_of[e] = r;
    out.element.push_back(e);
  }
  return out;
}

/// Action of a finite torus on a finite point space by permutations, with a
/// +-1 cocycle. Generators and their cocycles are given; the action of every
/// group element is derived and checked for consistency at construction.
class FlowAction {
 public:
  FlowAction(FinitePointSpace space, Torus torus, std::vector<std::vector<std::size_t>> generators,
             std::vector<std::vector<int>> cocycles = {})
      : space_(std::move(space)),
        torus_(std::move(torus)),
        generators_(std::move(generators)),
        generator_cocycles_(std::move(cocycles)) {
    const std::size_t n = space_.size();
    if (generators_.size() != torus_.rank()) throw Error(ErrorCode::InvalidFlow, "one generator per torus dimension");
    for (const auto& g : generators_) {
      if (g.size() != n) throw Error(ErrorCode::InvalidFlow, "generator length");
      std::vector<bool> hit(n, false);
      for (std::size_t s : g) {
        if (s >= n || hit[s]) throw Error(ErrorCode::InvalidFlow, "generator is not a permutation");
        hit[s] = true;
      }
    }
    if (generator_cocycles_.empty()) generator_cocycles_.assign(torus_.rank(), std::vector<int>(n, 1));
    if (generator_cocycles_.size() != torus_.rank()) throw Error(ErrorCode::InvalidCocycle, "one cocycle per generator");
    for (const auto& c : generator_cocycles_) {
      if (c.size() != n) throw Error(ErrorCode::InvalidCocycle, "cocycle length");
      for (int v : c) {
        if (v != 1 && v != -1) throw Error(ErrorCode::InvalidCocycle, "cocycle values must be +-1");
      }
    }
    build_tables();
  }

  const FinitePointSpace& space() const noexcept { return space_; }
  const Torus& torus() const noexcept { return torus_; }
  const std::vector<std::vector<std::size_t>>& generators() const noexcept { return generators_; }
  const std::vector<std::vector<int>>& generator_cocycles() const noexcept { return generator_cocycles_; }

  /// phi_t(s)
  std::size_t act(std::size_t t, std::size_t s) const { return perm_[t][s]; }
  /// c_t(s)
  int cocycle(std::size_t t, std::size_t s) const { return cocycle_[t][s]; }

 private:
  void build_tables() {
    const std::size_t n = space_.size();
    perm_.assign(torus_.size(), std::vector<std::size_t>(n));
    cocycle_.assign(torus_.size(), std::vector<int>(n, 1));
    std::iota(perm_[0].begin(), perm_[0].end(), 0);
    for (std::size_t idx = 1; idx < torus_.size(); ++idx) {
      auto c = torus_.coords(idx);
      std::size_t g = c.size();
      while (c[g - 1] == 0) --g;
      --g;
      c[g] -= 1;
      const std::size_t prev = torus_.index(c);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t mid = perm_[prev][s];
        perm_[idx][s] = generators_[g][mid];
        cocycle_[idx][s] = cocycle_[prev][s] * generator_cocycles_[g][mid];
      }
    }
    // phi_{t+g} = phi_g o phi_t and c_{t+g}(s) = c_t(s) c_g(phi_t(s)) for every
    // t and generator g, including wrap-around.
    for (std::size_t idx = 0; idx < torus_.size(); ++idx) {
      for (std::size_t g = 0; g < generators_.size(); ++g) {
        const std::size_t next = torus_.shift(idx, g);
        for (std::size_t s = 0; s < n; ++s) {
          if (perm_[next][s] != generators_[g][perm_[idx][s]]) {
            throw Error(ErrorCode::InvalidFlow, "generators do not commute or have order not dividing the torus size");
          }
        }
      }
    }
    for (std::size_t idx = 0; idx < torus_.size(); ++idx) {
      for (std::size_t g = 0; g < generators_.size(); ++g) {
        const std::size_t next = torus_.shift(idx, g);
        for (std::size_t s = 0; s < n; ++s) {
          if (cocycle_[next][s] != cocycle_[idx][s] * generator_cocycles_[g][perm_[idx][s]]) {
            throw Error(ErrorCode::InvalidCocycle, "cocycle identity fails at " + space_.label(s));
          }
        }
      }
    }
  }

  FinitePointSpace space_;
  Torus torus_;
  std::vector<std::vector<std::size_t>> generators_;
  std::vector<std::vector<int>> generator_cocycles_;
  std::vector<std::vector<std::size_t>> perm_;
  std::vector<std::vector<int>> cocycle_;
};

struct StationaryProcessSpec {
  double alpha = 1.0;
  FlowAction flow;
  std::vector<double> f0;
};

/// f_t(s) = c_t(s) (mu(phi_t(s)) / mu(s))^(1/alpha) f0(phi_t(s)) for every
/// element t of the torus.
inline SpectralRep build_flow_rep(const StationaryProcessSpec& spec) {
  const Alpha alpha(spec.alpha);
  const auto& flow = spec.flow;
  const auto& space = flow.space();
  const std::size_t n = space.size();
  if (spec.f0.size() != n) throw Error(ErrorCode::DimensionMismatch, "f0 length");
  const Torus& torus = flow.torus();
  Matrix values(torus.size(), n);
  for (std::size_t t = 0; t < torus.size(); ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t image = flow.act(t, s);
      if (spec.f0[image] == 0.0) continue;
      const double rn = std::pow(space.weight(image) / space.weight(s), 1.0 / alpha.value());
      values(t, s) = flow.cocycle(t, s) * rn * spec.f0[image];
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    bool hit = false;
    for (std::size_t t = 0; t < torus.size() && !hit; ++t) hit = values(t, s) != 0.0;
    if (!hit) throw Error(ErrorCode::FullSupportViolation, space.label(s));
  }
  return SpectralRep(alpha, space, torus.labels(), std::move(values));
}

/// Shift-invariance of the joint law under every generator of the torus
/// spanned by the time labels.
inline bool is_stationary(const SpectralRep& rep, double tol = kDefaultTolerance) {
  const TorusIndex index = parse_torus_index(rep.times());
  for (std::size_t g = 0; g < index.torus.rank(); ++g) {
    Matrix shifted(rep.time_count(), rep.point_count());
    for (std::size_t r = 0; r < rep.time_count(); ++r) {
      const std::size_t src = index.row_of[index.torus.shift(index.element[r], g)];
      for (std::size_t s = 0; s < rep.point_count(); ++s) shifted(r, s) = rep.values()(src, s);
    }
    SpectralRep moved(rep.alpha(), rep.space(), rep.times(), std::move(shifted));
    if (!same_process(rep, moved, tol)) return false;
  }
  return true;
}

/// Orbits of the action; on a finite space the invariant sets are exactly the
/// unions of orbits.
inline Partition invariant_partition(const FlowAction& flow) {
  const std::size_t n = flow.space().size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& g : flow.generators()) {
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t a = find(s), b = find(g[s]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> block_of_root(n, static_cast<std::size_t>(-1));
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t r = find(s);
    if (block_of_root[r] == static_cast<std::size_t>(-1)) {
      block_of_root[r] = blocks.size();
      blocks.emplace_back();
    }
    blocks[block_of_root[r]].push_back(s);
  }
  return Partition(std::move(blocks), flow.space());
}

namespace detail {

inline std::string block_label(const std::vector<std::string>& labels) {
  std::string out = "{";
  for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
  return out + "}";
}

}  // namespace detail

inline std::vector<SpectralRep> stationary_components(const StationaryProcessSpec& spec, const WeightFamily& w) {
  const Partition orbits = invariant_partition(spec.flow);
  for (std::size_t k = 0; k < w.k(); ++k) {
    if (w.r[k].size() != spec.flow.space().size()) throw Error(ErrorCode::DimensionMismatch, "weight vector length");
    for (std::size_t b = 0; b < orbits.size(); ++b) {
      const double ref = w.r[k][orbits.blocks()[b].front()];
      for (std::size_t s : orbits.blocks()[b]) {
        if (std::abs(w.r[k][s] - ref) > 1e-12) {
          throw Error(ErrorCode::NotInvariant,
                      "component " + std::to_string(k) + " orbit " + detail::block_label(orbits.labeled_blocks()[b]));
        }
      }
    }
  }
  return make_components(build_flow_rep(spec), w);
}

/// Weights of a stationary component; they are constant on every orbit.
inline std::vector<double> recover_stationary_weights(const StationaryProcessSpec& spec, const SpectralRep& component,
                                                      double tol = kDefaultTolerance) {
  const SpectralRep rep = build_flow_rep(spec);
  if (component.times() != rep.times()) throw Error(ErrorCode::TimesMismatch, "");
  if (!is_stationary(component, tol)) throw Error(ErrorCode::NotStationary, "");
  std::vector<double> r = recover_weights(rep, component, tol);
  const Partition orbits = invariant_partition(spec.flow);
  const double slack = std::max(1e-9, tol);
  for (std::size_t b = 0; b < orbits.size(); ++b) {
    const double ref = r[orbits.blocks()[b].front()];
    for (std::size_t s : orbits.blocks()[b]) {
      if (std::abs(r[s] - ref) > slack) {
        throw Error(ErrorCode::InvarianceViolation, detail::block_label(orbits.labeled_blocks()[b]));
      }
    }
  }
  return r;
}

struct IndecomposabilityVerdict {
  bool indecomposable = true;
  std::size_t orbit_count = 1;          // orbits of the induced action on the minimal space
  std::vector<std::string> witness;     // points of a proper invariant set when decomposable
};

/// Minimalizes the flow representation, pushes the action through the
/// collapse map and counts orbits of the induced action.
inline IndecomposabilityVerdict is_indecomposable(const StationaryProcessSpec& spec, double tol = kDefaultTolerance) {
  const SpectralRep rep = build_flow_rep(spec);
  const Minimalization mini = minimalize(rep);
  const Partition& collapse = mini.collapse;
  const std::size_t blocks = collapse.size();

  std::vector<std::size_t> parent(blocks);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& g : spec.flow.generators()) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto& members = collapse.blocks()[b];
      const std::size_t image = collapse.block_of(g[members.front()]);
      for (std::size_t s : members) {
        if (collapse.block_of(g[s]) != image) {
          throw Error(ErrorCode::InvarianceViolation, "shift does not map proportionality classes to classes");
        }
      }
      std::size_t x = find(b), y = find(image);
      if (x != y) parent[std::max(x, y)] = std::min(x, y);
    }
  }
  IndecomposabilityVerdict verdict;
  std::vector<bool> is_root(blocks, false);
  for (std::size_t b = 0; b < blocks; ++b) is_root[find(b)] = true;
  verdict.orbit_count = static_cast<std::size_t>(std::count(is_root.begin(), is_root.end(), true));
  verdict.indecomposable = verdict.orbit_count <= 1;
  if (verdict.indecomposable) return verdict;

  const std::size_t n = rep.point_count();
  std::vector<double> inside(n, 0.0), outside(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (find(collapse.block_of(s)) == find(0)) {
      inside[s] = 1.0;
      verdict.witness.push_back(rep.space().label(s));
    } else {
      outside[s] = 1.0;
    }
  }
  const auto parts = make_components(rep, WeightFamily{{inside, outside}});
  if (is_trivial_component(rep, parts[0], tol)) {
    throw Error(ErrorCode::InvarianceViolation, "witness component is a multiple of the process");
  }
  return verdict;
}

/// Discrete mixed moving average: kernel rows are torus elements, columns are
/// sheets v with control weights nu(v).
struct MmaKernel {
  double alpha = 1.0;
  std::vector<int> dims;
  std::vector<std::string> sheets;
  std::vector<double> nu;
  Matrix kernel;
};

/// Space torus x V with weights nu(v); the flow shifts the torus coordinate
/// and fixes the sheet. Point labels are "<torus element>|<sheet>".
inline StationaryProcessSpec mma_build(const MmaKernel& k) {
  const Torus torus(k.dims);
  const std::size_t nv = k.sheets.size();
  if (k.nu.size() != nv || k.kernel.cols() != nv || k.kernel.rows() != torus.size()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel must be |torus| x |V| with one nu per sheet");
  }
  for (std::size_t v = 0; v < nv; ++v) {
    bool nonzero = false;
    for (std::size_t i = 0; i < torus.size(); ++i) nonzero = nonzero || k.kernel(i, v) != 0.0;
    if (!nonzero) throw Error(ErrorCode::ZeroKernelSheet, k.sheets[v]);
  }
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::vector<double> f0;
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t i = 0; i < torus.size(); ++i) {
      labels.push_back(torus.label(i) + "|" + k.sheets[v]);
      weights.push_back(k.nu[v]);
      f0.push_back(k.kernel(i, v));
    }
  }
  std::vector<std::vector<std::size_t>> generators(torus.rank(), std::vector<std::size_t>(labels.size()));
  for (std::size_t g = 0; g < torus.rank(); ++g) {
    for (std::size_t v = 0; v < nv; ++v) {
      for (std::size_t i = 0; i < torus.size(); ++i) {
        generators[g][v * torus.size() + i] = v * torus.size() + torus.shift(i, g);
      }
    }
  }
  return StationaryProcessSpec{
      k.alpha, FlowAction(FinitePointSpace(std::move(labels), std::move(weights)), torus, std::move(generators)),
      std::move(f0)};
}

/// Restriction of the spec to a union of orbits.
inline StationaryProcessSpec restrict_spec(const StationaryProcessSpec& spec, const std::vector<std::size_t>& points) {
  const auto& flow = spec.flow;
  std::vector<std::size_t> local(flow.space().size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < points.size(); ++i) local[points[i]] = i;
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::vector<double> f0;
  for (std::size_t s : points) {
    labels.push_back(flow.space().label(s));
    weights.push_back(flow.space().weight(s));
    f0.push_back(spec.f0[s]);
  }
  std::vector<std::vector<std::size_t>> gens;
  std::vector<std::vector<int>> cocycles;
  for (std::size_t g = 0; g < flow.generators().size(); ++g) {
    std::vector<std::size_t> perm;
    std::vector<int> coc;
    for (std::size_t s : points) {
      const std::size_t image = local[flow.generators()[g][s]];
      if (image == static_cast<std::size_t>(-1)) throw Error(ErrorCode::InvalidFlow, "restriction is not invariant");
      perm.push_back(image);
      coc.push_back(flow.generator_cocycles()[g][s]);
    }
    gens.push_back(std::move(perm));
    cocycles.push_back(std::move(coc));
  }
  return StationaryProcessSpec{spec.alpha,
                               FlowAction(FinitePointSpace(std::move(labels), std::move(weights)), flow.torus(),
                                          std::move(gens), std::move(cocycles)),
                               std::move(f0)};
}

/// One sub-spec per orbit of a measure-preserving flow.
inline std::vector<StationaryProcessSpec> ergodic_decomposition(const StationaryProcessSpec& spec) {
  const auto& flow = spec.flow;
  const auto& space = flow.space();
  for (const auto& g : flow.generators()) {
    for (std::size_t s = 0; s < space.size(); ++s) {
      if (std::abs(space.weight(g[s]) - space.weight(s)) > 1e-12 * space.weight(s)) {
        throw Error(ErrorCode::NotMeasurePreserving, space.label(s));
      }
    }
  }
  (void)build_flow_rep(spec);
  std::vector<StationaryProcessSpec> out;
  const Partition orbits = invariant_partition(flow);
  for (const auto& block : orbits.blocks()) out.push_back(restrict_spec(spec, block));
  return out;
}

}  // namespace stabledecomp
