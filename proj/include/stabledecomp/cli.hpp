#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stabledecomp/io.hpp"

namespace stabledecomp::cli {

using nlohmann::json;
using io::num;
using io::num_array;

inline constexpr const char* kToolName = "stabledecomp";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToleranceEnv = "STABLEDECOMP_TOL";

/// Exit codes.
enum Exit : int { kTrue = 0, kFalse = 1, kInputError = 2, kInternalError = 3 };

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "canon",          "same",     "verify-decomp", "recover-weights",   "common",   "minimal",  "stationary",
      "indecomposable", "ergodic-decomp", "max-cdf", "verify-max-decomp", "simulate", "check-cf", "check-cdf",
      "increments"};
  return names;
}

inline double default_tolerance() {
  if (const char* env = std::getenv(kToleranceEnv)) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && *end == '\0' && v > 0.0) return v;
  }
  return kDefaultTolerance;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAComponent: return kFalse;
    case ErrorCode::InvarianceViolation: return kInternalError;
    default: return kInputError;
  }
}

namespace detail {

using io::num;
using io::num_array;

struct Context {
  std::string command;
  json inputs = json::object();

  io::SpecFile load(const std::string& role, const std::string& path) {
    io::SpecFile f = io::parse_spec_file(path);
    json entry = {{"file", f.name}, {"fnv1a64", f.hash}, {"kind", io::kind_name(f.kind)}};
    if (inputs.contains(role)) {
      if (!inputs[role].is_array()) inputs[role] = json::array({inputs[role]});
      inputs[role].push_back(entry);
    } else {
      inputs[role] = entry;
    }
    return f;
  }
};

inline const SpectralRep& as_sas(const io::SpecFile& f) {
  if (f.kind != io::SpecKind::SasRep) throw Error(ErrorCode::SchemaError, f.name + ": expected kind sas_rep");
  return std::get<SpectralRep>(f.payload);
}

inline const MaxStableRep& as_max(const io::SpecFile& f) {
  if (f.kind != io::SpecKind::MaxRep) throw Error(ErrorCode::SchemaError, f.name + ": expected kind max_rep");
  return std::get<MaxStableRep>(f.payload);
}

inline StationaryProcessSpec as_stationary(const io::SpecFile& f) {
  if (f.kind == io::SpecKind::FlowSpec) return std::get<StationaryProcessSpec>(f.payload);
  if (f.kind == io::SpecKind::MmaSpec) return mma_build(std::get<MmaKernel>(f.payload));
  throw Error(ErrorCode::SchemaError, f.name + ": expected kind flow_spec or mma_spec");
}

// Reindexes a weights document onto `space`; points it does not mention get 0.
inline WeightFamily align_weights(const io::WeightsDoc& doc, const FinitePointSpace& space, double alpha) {
  if (doc.alpha != alpha) throw Error(ErrorCode::AlphaMismatch, "weights alpha differs from the process");
  WeightFamily w;
  for (const auto& rk : doc.w.r) {
    std::vector<double> row(space.size(), 0.0);
    for (std::size_t i = 0; i < doc.points.size(); ++i) {
      auto s = space.find(doc.points[i]);
      if (!s) throw Error(ErrorCode::DanglingLabel, doc.points[i]);
      row[*s] = rk[i];
    }
    w.r.push_back(std::move(row));
  }
  return w;
}

inline json verdict_json(const IndecomposabilityVerdict& v) {
  return {{"verdict", v.indecomposable ? "Indecomposable" : "Decomposable"},
          {"orbit_count", v.orbit_count},
          {"witness", v.witness}};
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t i = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[i];
}

inline json sample_summary(const SampleMatrix& m, std::size_t print_rows) {
  json rows = json::array();
  for (std::size_t i = 0; i < std::min(print_rows, m.rows); ++i) {
    auto r = m.row(i);
    rows.push_back(num_array(std::vector<double>(r.begin(), r.end())));
  }
  json quantiles = json::object();
  if (m.rows > 0) {
    for (std::size_t t = 0; t < m.cols; ++t) {
      auto col = m.column(t);
      std::sort(col.begin(), col.end());
      quantiles[m.times[t]] = {{"q10", num(quantile_sorted(col, 0.1))},
                               {"q25", num(quantile_sorted(col, 0.25))},
                               {"q50", num(quantile_sorted(col, 0.5))},
                               {"q75", num(quantile_sorted(col, 0.75))},
                               {"q90", num(quantile_sorted(col, 0.9))}};
    }
  }
  return {{"rep_fnv1a64", io::detail::hex64(m.rep_hash)},
          {"samples", m.rows},
          {"seed", m.config.seed},
          {"first_rows", rows},
          {"quantiles", quantiles}};
}

// Random probes with scale functional spread over [0.1, 1.5].
inline std::vector<std::vector<double>> cf_probes(const SpectralRep& rep, std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  const double alpha = rep.alpha().value();
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<double> a(rep.time_count());
    for (std::size_t t = 0; t < a.size(); ++t) a[t] = 2.0 * counter_uniform(seed, p, t, 7) - 1.0;
    const double base = scale_functional(rep, a);
    if (base > 0.0) {
      const double target = 0.1 + 1.4 * counter_uniform(seed, p, 0, 8);
      const double lambda = std::pow(target / base, 1.0 / alpha);
      for (auto& v : a) v *= lambda;
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Random time subsets of size <= 3 with marginal probabilities in [0.3, 0.95].
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> cdf_probes(const MaxStableRep& rep,
                                                                                       std::size_t count,
                                                                                       std::uint64_t seed) {
  std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> out;
  const std::size_t nt = rep.time_count();
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t size = 1 + static_cast<std::size_t>(counter_uniform(seed, p, 0, 9) * std::min<std::size_t>(3, nt));
    std::vector<std::size_t> rows;
    std::vector<double> ys;
    for (std::size_t j = 0; rows.size() < std::min(size, nt); ++j) {
      const std::size_t t = static_cast<std::size_t>(counter_uniform(seed, p, j, 10) * nt);
      if (std::find(rows.begin(), rows.end(), t) != rows.end()) continue;
      double sigma_alpha = 0.0;
      for (std::size_t s = 0; s < rep.point_count(); ++s) {
        sigma_alpha += std::pow(rep.values()(t, s), rep.alpha()) * rep.space().weight(s);
      }
      const double prob = 0.3 + 0.65 * counter_uniform(seed, p, j, 11);
      rows.push_back(t);
      ys.push_back(std::pow(sigma_alpha / -std::log(prob), 1.0 / rep.alpha()));
    }
    out.emplace_back(std::move(rows), std::move(ys));
  }
  return out;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name. The report goes to
/// `out` as JSON; diagnostics go to `err`. Returns the exit code.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  json report = {{"tool", {{"name", kToolName}, {"version", kVersion}}}};
  auto emit = [&](int code) {
    report["exit_code"] = code;
    out << report.dump(2) << "\n";
    return code;
  };
  auto fail = [&](const std::string& code_name, const std::string& detail, int code) {
    report["error"] = {{"code", code_name}, {"detail", detail}};
    err << kToolName << ": " << code_name << (detail.empty() ? "" : ": " + detail) << "\n";
    return emit(code);
  };

  if (args.empty()) {
    report["command"] = nullptr;
    return fail("UsageError", "no subcommand given", kInputError);
  }
  const std::string& cmd = args[0];
  report["command"] = cmd;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cmd) == names.end()) {
    return fail("UnknownCommand", cmd, kInputError);
  }

  CLI::App app{"Decomposition analysis of stable and max-stable processes", std::string(kToolName) + " " + cmd};
  std::string process, a_path, b_path, component, flow, spec_path, weights_path;
  std::vector<std::string> components, times;
  std::vector<double> ys;
  double tol = default_tolerance();
  double level = 0.01;
  std::uint64_t seed = 0;
  std::size_t samples = 0, probes = 0, print_rows = 5;
  unsigned threads = 0;
  bool max_mode = false;

  auto opt_process = [&] { app.add_option("--process", process, "process spec file")->required(); };
  auto opt_tol = [&] { app.add_option("--tol", tol, "relative mass tolerance")->check(CLI::PositiveNumber); };
  auto opt_pair = [&] {
    app.add_option("--a", a_path, "first process")->required();
    app.add_option("--b", b_path, "second process")->required();
  };
  auto opt_sim = [&](std::size_t default_samples) {
    samples = default_samples;
    app.add_option("--samples", samples, "number of samples")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
  };

  if (cmd == "canon" || cmd == "minimal") {
    opt_process();
  } else if (cmd == "same" || cmd == "common") {
    opt_pair();
    opt_tol();
  } else if (cmd == "verify-decomp" || cmd == "verify-max-decomp") {
    opt_process();
    app.add_option("--components", components, "component spec files")->required();
    opt_tol();
  } else if (cmd == "recover-weights") {
    opt_process();
    app.add_option("--component", component, "candidate component")->required();
    opt_tol();
  } else if (cmd == "stationary") {
    auto* p = app.add_option("--process", process, "sas_rep indexed by a torus");
    auto* f = app.add_option("--flow", flow, "flow_spec or mma_spec");
    p->excludes(f);
    opt_tol();
  } else if (cmd == "indecomposable") {
    app.add_option("--flow", flow, "flow_spec or mma_spec")->required();
    app.add_flag("--max", max_mode, "treat the spec as a stationary max-stable process");
    opt_tol();
  } else if (cmd == "ergodic-decomp") {
    app.add_option("--flow", flow, "flow_spec or mma_spec")->required();
    opt_tol();
  } else if (cmd == "max-cdf") {
    opt_process();
    app.add_option("--times", times, "time labels")->required();
    app.add_option("--y", ys, "thresholds")->required();
  } else if (cmd == "simulate") {
    opt_process();
    opt_sim(1000);
    app.add_option("--print", print_rows, "rows to include in the report");
  } else if (cmd == "check-cf" || cmd == "check-cdf") {
    opt_process();
    opt_sim(100000);
    probes = cmd == "check-cf" ? 50 : 20;
    app.add_option("--probes", probes, "number of probes")->check(CLI::PositiveNumber);
    app.add_option("--level", level, "test level")->check(CLI::Range(0.0, 1.0));
  } else if (cmd == "increments") {
    app.add_option("--spec", spec_path, "increments spec")->required();
    app.add_option("--weights", weights_path, "component weights");
  }

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kTrue;
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), kInputError);
  }

  detail::Context ctx{cmd};
  try {
    json result = json::object();
    int code = kTrue;
    auto set_bool = [&](bool v) {
      report["verdict"] = v;
      code = v ? kTrue : kFalse;
    };

    if (cmd == "canon") {
      auto f = ctx.load("process", process);
      const CanonicalSpectralMeasure m = f.kind == io::SpecKind::MaxRep
                                             ? canonicalize(stabledecomp::detail::bridge_to_sas(detail::as_max(f)))
                                             : canonicalize(detail::as_sas(f));
      result["canonical"] = io::measure_json(m);
      set_bool(true);
    } else if (cmd == "same") {
      auto fa = ctx.load("a", a_path);
      auto fb = ctx.load("b", b_path);
      if (fa.kind == io::SpecKind::MaxRep) {
        set_bool(max_same_process(detail::as_max(fa), detail::as_max(fb), tol));
      } else {
        set_bool(same_process(detail::as_sas(fa), detail::as_sas(fb), tol));
      }
    } else if (cmd == "verify-decomp") {
      const SpectralRep rep = detail::as_sas(ctx.load("process", process));
      std::vector<SpectralRep> comps;
      for (const auto& c : components) comps.push_back(detail::as_sas(ctx.load("components", c)));
      result["component_count"] = comps.size();
      set_bool(verify_decomposition(rep, comps, tol));
    } else if (cmd == "verify-max-decomp") {
      const MaxStableRep rep = detail::as_max(ctx.load("process", process));
      std::vector<MaxStableRep> comps;
      for (const auto& c : components) comps.push_back(detail::as_max(ctx.load("components", c)));
      result["component_count"] = comps.size();
      set_bool(verify_max_decomposition(rep, comps, tol));
    } else if (cmd == "recover-weights") {
      auto fx = ctx.load("process", process);
      auto fz = ctx.load("component", component);
      if (fx.kind == io::SpecKind::MaxRep) {
        const auto& x = detail::as_max(fx);
        result["r"] = io::point_weights_json(x.space(), recover_max_weights(x, detail::as_max(fz), tol));
      } else {
        const auto& x = detail::as_sas(fx);
        result["r"] = io::point_weights_json(x.space(), recover_weights(x, detail::as_sas(fz), tol));
      }
      set_bool(true);
    } else if (cmd == "common") {
      const SpectralRep a = detail::as_sas(ctx.load("a", a_path));
      const SpectralRep b = detail::as_sas(ctx.load("b", b_path));
      auto c = common_component(a, b, tol);
      result["common"] = c ? io::rep_json(*c) : json(nullptr);
      set_bool(c.has_value());
    } else if (cmd == "minimal") {
      const SpectralRep rep = detail::as_sas(ctx.load("process", process));
      const Minimalization m = minimalize(rep);
      result["partition"] = io::partition_json(m.collapse);
      result["minimal"] = io::rep_json(m.rep);
      set_bool(is_minimal(rep));
    } else if (cmd == "stationary") {
      std::optional<SpectralRep> rep;
      if (!process.empty()) {
        rep = detail::as_sas(ctx.load("process", process));
      } else if (!flow.empty()) {
        rep = build_flow_rep(detail::as_stationary(ctx.load("flow", flow)));
      } else {
        throw Error(ErrorCode::UsageError, "one of --process or --flow is required");
      }
      set_bool(is_stationary(*rep, tol));
    } else if (cmd == "indecomposable") {
      const StationaryProcessSpec spec = detail::as_stationary(ctx.load("flow", flow));
      const auto v = max_mode ? is_indecomposable_max(spec, tol) : is_indecomposable(spec, tol);
      result = detail::verdict_json(v);
      report["verdict"] = v.indecomposable ? "Indecomposable" : "Decomposable";
      code = v.indecomposable ? kTrue : kFalse;
    } else if (cmd == "ergodic-decomp") {
      const StationaryProcessSpec spec = detail::as_stationary(ctx.load("flow", flow));
      const auto parts = ergodic_decomposition(spec);
      json list = json::array();
      std::vector<SpectralRep> reps;
      bool all_indecomposable = true;
      for (const auto& p : parts) {
        const auto v = is_indecomposable(p, tol);
        all_indecomposable = all_indecomposable && v.indecomposable;
        list.push_back({{"points", p.flow.space().labels()}, {"indecomposable", v.indecomposable}});
        reps.push_back(build_flow_rep(p));
      }
      const bool sums = verify_decomposition(build_flow_rep(spec), reps, tol);
      result["components"] = list;
      result["sum_reproduces_process"] = sums;
      set_bool(sums && all_indecomposable);
    } else if (cmd == "max-cdf") {
      const MaxStableRep rep = detail::as_max(ctx.load("process", process));
      result["times"] = times;
      result["y"] = num_array(ys);
      result["probability"] = num(frechet_fdd_cdf(rep, times, ys));
      set_bool(true);
    } else if (cmd == "simulate") {
      auto f = ctx.load("process", process);
      const SimulationConfig cfg{seed, samples, 4096, threads};
      const SampleMatrix m =
          f.kind == io::SpecKind::MaxRep ? sample_frechet(detail::as_max(f), cfg) : sample_sas(detail::as_sas(f), cfg);
      result = detail::sample_summary(m, print_rows);
      set_bool(true);
    } else if (cmd == "check-cf") {
      const SpectralRep rep = detail::as_sas(ctx.load("process", process));
      const SampleMatrix m = sample_sas(rep, SimulationConfig{seed, samples, 4096, threads});
      const CfReport r = check_empirical_cf(m, rep, detail::cf_probes(rep, probes, seed ^ 0x5eedULL), level);
      json rows = json::array();
      for (const auto& p : r.probes) {
        rows.push_back({{"a", num_array(p.a)},
                        {"empirical", num(p.empirical)},
                        {"theoretical", num(p.theoretical)},
                        {"deviation", num(p.deviation)},
                        {"flagged", p.flagged}});
      }
      result = {{"samples", r.n}, {"envelope", num(r.envelope)}, {"level", num(r.level)},
                {"flagged", r.flagged}, {"probes", rows}};
      set_bool(r.pass);
    } else if (cmd == "check-cdf") {
      const MaxStableRep rep = detail::as_max(ctx.load("process", process));
      const SampleMatrix m = sample_frechet(rep, SimulationConfig{seed, samples, 4096, threads});
      const CdfReport r = check_empirical_cdf(m, rep, detail::cdf_probes(rep, probes, seed ^ 0x5eedULL), level);
      json rows = json::array();
      for (const auto& p : r.probes) {
        json ts = json::array();
        for (std::size_t t : p.rows) ts.push_back(rep.times()[t]);
        rows.push_back({{"times", ts},
                        {"y", num_array(p.y)},
                        {"empirical", num(p.empirical)},
                        {"theoretical", num(p.theoretical)},
                        {"envelope", num(p.envelope)},
                        {"flagged", p.flagged}});
      }
      json ks = json::array();
      for (const auto& mk : r.marginals) {
        ks.push_back({{"time", mk.time}, {"statistic", num(mk.ks.statistic)}, {"p_value", num(mk.ks.p_value)},
                      {"pass", mk.pass}});
      }
      result = {{"samples", r.n}, {"level", num(r.level)}, {"probes", rows}, {"marginal_ks", ks}};
      set_bool(r.pass);
    } else if (cmd == "increments") {
      auto f = ctx.load("spec", spec_path);
      if (f.kind != io::SpecKind::Increments) throw Error(ErrorCode::SchemaError, f.name + ": expected kind increments");
      const auto& doc = std::get<io::IncrementsDoc>(f.payload);
      const SpectralRep rep = independent_increments_rep(Alpha(doc.alpha), doc.times, doc.m);
      result["process"] = io::rep_json(rep);
      bool ok = has_independent_increments(rep);
      result["independent_increments"] = ok;
      if (!weights_path.empty()) {
        auto fw = ctx.load("weights", weights_path);
        if (fw.kind != io::SpecKind::Weights) throw Error(ErrorCode::SchemaError, fw.name + ": expected kind weights");
        const WeightFamily w =
            detail::align_weights(std::get<io::WeightsDoc>(fw.payload), rep.space(), rep.alpha().value());
        json comps = json::array();
        for (const auto& c : make_components(rep, w)) {
          const bool inc = has_independent_increments(c);
          ok = ok && inc;
          comps.push_back({{"points", c.space().labels()}, {"independent_increments", inc}});
        }
        result["components"] = comps;
      }
      set_bool(ok);
    }
    report["inputs"] = ctx.inputs;
    report["result"] = result;
    return emit(code);
  } catch (const Error& e) {
    report["inputs"] = ctx.inputs;
    return fail(std::string(error_name(e.code())), e.subject(), exit_code_for(e.code()));
  } catch (const std::exception& e) {
    report["inputs"] = ctx.inputs;
    return fail("InternalError", e.what(), kInternalError);
  }
}

}  // namespace stabledecomp::cli
