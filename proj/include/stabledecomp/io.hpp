#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabledecomp/core.hpp"
#include "stabledecomp/decompose.hpp"
#include "stabledecomp/maxstable.hpp"
#include "stabledecomp/simulate.hpp"
#include "stabledecomp/stationary.hpp"

namespace stabledecomp::io {

using nlohmann::json;

enum class SpecKind { SasRep, MaxRep, Weights, FlowSpec, MmaSpec, Increments };

inline std::string_view kind_name(SpecKind k) {
  switch (k) {
    case SpecKind::SasRep: return "sas_rep";
    case SpecKind::MaxRep: return "max_rep";
    case SpecKind::Weights: return "weights";
    case SpecKind::FlowSpec: return "flow_spec";
    case SpecKind::MmaSpec: return "mma_spec";
    case SpecKind::Increments: return "increments";
  }
  return "";
}

/// Weight family together with the points it is indexed by.
struct WeightsDoc {
  double alpha = 1.0;
  std::vector<std::string> points;
  WeightFamily w;
};

struct IncrementsDoc {
  double alpha = 1.0;
  std::vector<double> times;
  std::vector<double> m;
};

using SpecPayload = std::variant<SpectralRep, MaxStableRep, WeightsDoc, StationaryProcessSpec, MmaKernel, IncrementsDoc>;

struct SpecFile {
  SpecKind kind;
  std::string name;  // file name without directories
  std::string hash;  // FNV-1a 64 of the file bytes, hex
  SpecPayload payload;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline const json& field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorCode::SchemaError, std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, where + " must be a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::string> strings(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::SchemaError, where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(ErrorCode::SchemaError, where + " must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::size_t index_of(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error(ErrorCode::DanglingLabel, label);
  return static_cast<std::size_t>(it - labels.begin());
}

// `f` maps time labels to rows over the points.
inline Matrix read_values(const json& doc, const std::vector<std::string>& times, std::size_t npoints) {
  const json& f = field(doc, "f");
  if (!f.is_object()) throw Error(ErrorCode::SchemaError, "f must be an object keyed by time label");
  Matrix values(times.size(), npoints);
  for (auto it = f.begin(); it != f.end(); ++it) index_of(times, it.key());
  for (std::size_t t = 0; t < times.size(); ++t) {
    auto row_it = f.find(times[t]);
    if (row_it == f.end()) throw Error(ErrorCode::SchemaError, "f has no row for time '" + times[t] + "'");
    auto row = numbers(*row_it, "f." + times[t]);
    if (row.size() != npoints) throw Error(ErrorCode::SchemaError, "f." + times[t] + " must have one value per point");
    for (std::size_t s = 0; s < npoints; ++s) values(t, s) = row[s];
  }
  return values;
}

inline std::vector<std::size_t> read_permutation(const json& v, const std::vector<std::string>& points,
                                                 const std::string& where) {
  std::vector<std::size_t> out;
  for (const auto& label : strings(v, where)) out.push_back(index_of(points, label));
  if (out.size() != points.size()) throw Error(ErrorCode::SchemaError, where + " must map every point");
  return out;
}

inline SpecPayload parse_payload(SpecKind kind, const json& doc) {
  switch (kind) {
    case SpecKind::SasRep:
    case SpecKind::MaxRep: {
      const double alpha = number(field(doc, "alpha"), "alpha");
      auto points = strings(field(doc, "points"), "points");
      auto mu = numbers(field(doc, "mu"), "mu");
      auto times = strings(field(doc, "times"), "times");
      Matrix values = read_values(doc, times, points.size());
      if (kind == SpecKind::SasRep) {
        return validate_rep(RepCandidate{alpha, std::move(points), std::move(mu), std::move(times), std::move(values)});
      }
      return MaxStableRep(alpha, FinitePointSpace(std::move(points), std::move(mu)), std::move(times), std::move(values));
    }
    case SpecKind::Weights: {
      WeightsDoc w;
      w.alpha = number(field(doc, "alpha"), "alpha");
      w.points = strings(field(doc, "points"), "points");
      const json& r = field(doc, "r");
      if (!r.is_array()) throw Error(ErrorCode::SchemaError, "r must be an array of objects");
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (!r[k].is_object()) throw Error(ErrorCode::SchemaError, "r[" + std::to_string(k) + "] must be an object");
        std::vector<double> rk(w.points.size(), 0.0);
        for (auto it = r[k].begin(); it != r[k].end(); ++it) {
          rk[index_of(w.points, it.key())] = number(it.value(), "r[" + std::to_string(k) + "]." + it.key());
        }
        w.w.r.push_back(std::move(rk));
      }
      std::vector<double> ones(w.points.size(), 1.0);
      try {
        check_weight_norms(w.w, FinitePointSpace(w.points, ones), w.alpha);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::WeightNormViolation) throw;
        throw Error(ErrorCode::SchemaError, "sum_k |r_k|^alpha != 1 at point " + e.subject());
      }
      return w;
    }
    case SpecKind::FlowSpec: {
      const double alpha = number(field(doc, "alpha"), "alpha");
      auto points = strings(field(doc, "points"), "points");
      auto mu = numbers(field(doc, "mu"), "mu");
      std::vector<int> dims;
      for (double d : numbers(field(doc, "dims"), "dims")) {
        if (d != std::floor(d) || d < 1) throw Error(ErrorCode::SchemaError, "dims must be positive integers");
        dims.push_back(static_cast<int>(d));
      }
      const json& phi = field(doc, "phi");
      if (!phi.is_array()) throw Error(ErrorCode::SchemaError, "phi must be an array of point-label arrays");
      std::vector<std::vector<std::size_t>> gens;
      for (std::size_t g = 0; g < phi.size(); ++g) gens.push_back(read_permutation(phi[g], points, "phi[" + std::to_string(g) + "]"));
      std::vector<std::vector<int>> cocycles;
      if (doc.contains("cocycle")) {
        const json& c = doc["cocycle"];
        if (!c.is_array()) throw Error(ErrorCode::SchemaError, "cocycle must be an array");
        for (std::size_t g = 0; g < c.size(); ++g) {
          std::vector<int> row;
          for (double v : numbers(c[g], "cocycle[" + std::to_string(g) + "]")) row.push_back(static_cast<int>(v));
          cocycles.push_back(std::move(row));
        }
      }
      auto f0 = numbers(field(doc, "f0"), "f0");
      if (f0.size() != points.size()) throw Error(ErrorCode::SchemaError, "f0 must have one value per point");
      return StationaryProcessSpec{alpha,
                                   FlowAction(FinitePointSpace(std::move(points), std::move(mu)), Torus(dims),
                                              std::move(gens), std::move(cocycles)),
                                   std::move(f0)};
    }
    case SpecKind::MmaSpec: {
      MmaKernel k;
      k.alpha = number(field(doc, "alpha"), "alpha");
      for (double d : numbers(field(doc, "dims"), "dims")) {
        if (d != std::floor(d) || d < 1) throw Error(ErrorCode::SchemaError, "dims must be positive integers");
        k.dims.push_back(static_cast<int>(d));
      }
      k.sheets = strings(field(doc, "sheets"), "sheets");
      k.nu = numbers(field(doc, "nu"), "nu");
      const Torus torus(k.dims);
      const json& kernel = field(doc, "kernel");
      if (!kernel.is_object()) throw Error(ErrorCode::SchemaError, "kernel must be an object keyed by sheet");
      for (auto it = kernel.begin(); it != kernel.end(); ++it) index_of(k.sheets, it.key());
      k.kernel = Matrix(torus.size(), k.sheets.size());
      for (std::size_t v = 0; v < k.sheets.size(); ++v) {
        auto col_it = kernel.find(k.sheets[v]);
        if (col_it == kernel.end()) throw Error(ErrorCode::SchemaError, "kernel has no sheet '" + k.sheets[v] + "'");
        auto col = numbers(*col_it, "kernel." + k.sheets[v]);
        if (col.size() != torus.size()) throw Error(ErrorCode::SchemaError, "kernel." + k.sheets[v] + " must cover the torus");
        for (std::size_t i = 0; i < col.size(); ++i) k.kernel(i, v) = col[i];
      }
      return k;
    }
    case SpecKind::Increments: {
      IncrementsDoc d;
      d.alpha = number(field(doc, "alpha"), "alpha");
      d.times = numbers(field(doc, "times"), "times");
      d.m = numbers(field(doc, "m"), "m");
      return d;
    }
  }
  throw Error(ErrorCode::SchemaError, "unknown kind");
}

}  // namespace detail

inline SpecFile parse_spec_text(const std::string& text, const std::string& name) {
  stabledecomp::detail::Fnv1a h;
  h.bytes(text.data(), text.size());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, name + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, name + ": document must be an object");
  const json& kind_field = detail::field(doc, "kind");
  if (!kind_field.is_string()) throw Error(ErrorCode::SchemaError, "kind must be a string");
  const std::string kind_text = kind_field.get<std::string>();
  static const std::unordered_map<std::string, SpecKind> kinds = {
      {"sas_rep", SpecKind::SasRep},     {"max_rep", SpecKind::MaxRep},   {"weights", SpecKind::Weights},
      {"flow_spec", SpecKind::FlowSpec}, {"mma_spec", SpecKind::MmaSpec}, {"increments", SpecKind::Increments}};
  auto it = kinds.find(kind_text);
  if (it == kinds.end()) throw Error(ErrorCode::SchemaError, "unknown kind '" + kind_text + "'");
  return SpecFile{it->second, name, detail::hex64(h.value()), detail::parse_payload(it->second, doc)};
}

inline SpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str(), std::filesystem::path(path).filename().string());
}

/// Numbers in reports carry 12 significant digits.
inline json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double r = std::strtod(buf, nullptr);
  if (r == 0.0) r = 0.0;
  return r;
}

inline json num_array(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

inline json measure_json(const CanonicalSpectralMeasure& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms) atoms.push_back({{"direction", num_array(a.direction)}, {"mass", num(a.mass)}});
  return {{"alpha", num(m.alpha)}, {"times", m.times}, {"atoms", atoms}, {"total_mass", num(m.total_mass)}};
}

template <class Rep>
json rep_json(const Rep& rep, double alpha, std::string_view kind) {
  json f = json::object();
  for (std::size_t t = 0; t < rep.time_count(); ++t) {
    const auto row = rep.values().row(t);
    f[rep.times()[t]] = num_array(std::vector<double>(row.begin(), row.end()));
  }
  return {{"kind", kind},
          {"alpha", num(alpha)},
          {"points", rep.space().labels()},
          {"mu", num_array(rep.space().weights())},
          {"times", rep.times()},
          {"f", f}};
}

inline json rep_json(const SpectralRep& rep) { return rep_json(rep, rep.alpha().value(), "sas_rep"); }
inline json rep_json(const MaxStableRep& rep) { return rep_json(rep, rep.alpha(), "max_rep"); }

inline json partition_json(const Partition& p) { return p.labeled_blocks(); }

inline json point_weights_json(const FinitePointSpace& space, const std::vector<double>& r) {
  json out = json::array();
  for (std::size_t s = 0; s < space.size(); ++s) out.push_back({{"point", space.label(s)}, {"r", num(r[s])}});
  return out;
}

}  // namespace stabledecomp::io
