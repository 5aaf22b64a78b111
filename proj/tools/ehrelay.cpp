// ehrelay: closed forms vs simulation, sweeps and optimization from the
// command line.
//
// Exit codes: 0 ok, 1 validation check failed, 2 bad arguments or config,
// 3 invalid scenario, 4 I/O error, 5 optimizer fell back to grid search.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehrelay/analytic.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/montecarlo.hpp"
#include "ehrelay/optimize.hpp"
#include "ehrelay/scenario.hpp"
#include "ehrelay/sweep.hpp"

namespace {

using namespace ehrelay;
using nlohmann::json;

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitScenario = 3;
constexpr int kExitIo = 4;
constexpr int kExitFallback = 5;

// A config file is either a bare scenario or a preset
// {"scenario": {...}, "sweep": {...}?, "series": [{"label", "set"}]?}.
struct Loaded {
  Scenario base;
  json sweep;  // null when absent
  std::vector<Series> series;
};

Loaded load_config(const std::string& path,
                   const std::vector<std::string>& overrides) {
  const json j = read_json_file(path);
  Loaded out;
  const bool preset = j.is_object() && j.contains("scenario");
  if (preset) {
    detail::reject_unknown(
        j, {"name", "comment", "description", "scenario", "sweep", "series"},
        path);
    out.base = parse_scenario(j.at("scenario"));
    if (j.contains("sweep")) out.sweep = j.at("sweep");
  } else {
    out.base = parse_scenario(j);
  }

  std::vector<std::pair<std::string, json>> sets;
  if (preset && j.contains("series")) {
    const auto& arr = j.at("series");
    if (!arr.is_array() || arr.empty()) {
      throw ConfigError(path + ": \"series\" must be a non-empty array");
    }
    for (const auto& s : arr) {
      if (!s.is_object() || !s.contains("label") || !s.at("label").is_string()) {
        throw ConfigError(path + ": each series needs a string \"label\"");
      }
      detail::reject_unknown(s, {"label", "set"}, "series");
      sets.emplace_back(s.at("label").get<std::string>(),
                        s.value("set", json::object()));
    }
  } else {
    sets.emplace_back("", json::object());
  }

  for (const auto& [label, set] : sets) {
    Scenario s = out.base;
    if (!set.is_object()) throw ConfigError("series " + label + ": \"set\" must be an object");
    for (const auto& [key, value] : set.items()) {
      if (!value.is_number()) {
        throw ConfigError("series " + label + ": \"" + key + "\" must be a number");
      }
      apply_override(s, key, value.get<double>());
    }
    for (const auto& o : overrides) apply_override(s, o);
    out.series.push_back({label, s});
  }
  for (const auto& o : overrides) apply_override(out.base, o);
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string fmt(double v) { return format_number(v); }

void print_scenario_header(const Scenario& s, const SystemParams& sys) {
  const auto& l = sys.links();
  std::printf("scenario %s  hash %s\n", s.name.empty() ? "-" : s.name.c_str(),
              scenario_hash(s).c_str());
  std::printf("  lambda sr %s rd %s sd %s sp %s rp %s\n", fmt(l.lambda_sr).c_str(),
              fmt(l.lambda_rd).c_str(), fmt(l.lambda_sd).c_str(),
              fmt(l.lambda_sp).c_str(), fmt(l.lambda_rp).c_str());
  std::printf("  eta %s  rho %s  rs %s  I/N0 %s (linear %s)\n",
              fmt(sys.eta()).c_str(), fmt(sys.rho()).c_str(), fmt(sys.rs()).c_str(),
              (fmt(s.i_over_no_value) + (s.i_over_no_in_db ? " dB" : "")).c_str(),
              fmt(sys.i_over_no()).c_str());
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  std::string report;
};

int run_validate(const ValidateArgs& a) {
  const Loaded cfg = load_config(a.config, a.overrides);
  const SystemParams sys = cfg.base.system();
  const OutageBreakdown b = tau_incremental(sys);
  const McEstimate mc = estimate(sys, a.trials, a.seed, McOptions{a.workers});

  print_scenario_header(cfg.base, sys);
  std::printf("  trials %llu  seed %llu\n\n",
              static_cast<unsigned long long>(a.trials),
              static_cast<unsigned long long>(a.seed));
  std::printf("%-5s %15s %15s %15s %15s %15s  %s\n", "qty", "closed_form",
              "monte_carlo", "mc_stderr", "abs_diff", "tolerance", "result");

  json rows = json::array();
  bool all_ok = true;
  const auto row = [&](const char* name, double analytic, double sim, double se,
                       double tol, bool checked) {
    const double diff = std::abs(analytic - sim);
    const bool ok = !checked || diff <= tol;
    all_ok = all_ok && ok;
    std::printf("%-5s %15s %15s %15s %15s %15s  %s\n", name, fmt(analytic).c_str(),
                fmt(sim).c_str(), fmt(se).c_str(), fmt(diff).c_str(),
                checked ? fmt(tol).c_str() : "-", checked ? (ok ? "PASS" : "FAIL") : "info");
    rows.push_back({{"quantity", name},
                    {"closed_form", analytic},
                    {"monte_carlo", sim},
                    {"mc_stderr", se},
                    {"abs_diff", diff},
                    {"tolerance", checked ? json(tol) : json(nullptr)},
                    {"pass", checked ? json(ok) : json(nullptr)}});
  };
  const auto se_of = [&](double p) { return binomial_std_error(p, a.trials); };
  // p1, p2 and q2 are exact: 4 binomial standard errors of the closed form.
  row("p1", b.p1, mc.p1(), se_of(mc.p1()), 4.0 * se_of(b.p1), true);
  row("p2", b.p2, mc.p2(), se_of(mc.p2()), 4.0 * se_of(b.p2), true);
  row("q2", b.q2, mc.q2(), se_of(mc.q2()), 4.0 * se_of(b.q2), true);
  row("p3", b.p3, mc.p3(), se_of(mc.p3()), 0.01, true);
  row("q1", b.q1, mc.q1(), se_of(mc.q1()), 0.0, false);
  row("tau", b.tau, mc.mean, mc.std_error, 0.02, true);
  if (b.p3_clamped) {
    std::printf("\nwarning: approximate p3 left [0, 1] (raw %s) and was clamped\n",
                fmt(b.p3_raw).c_str());
  }
  std::printf("\n%s\n", all_ok ? "all checks passed" : "some checks FAILED");

  if (!a.report.empty()) {
    const json report = {{"scenario", cfg.base.to_json()},
                         {"scenario_hash", scenario_hash(cfg.base)},
                         {"trials", a.trials},
                         {"seed", a.seed},
                         {"version", EHRELAY_VERSION},
                         {"p3_clamped", b.p3_clamped},
                         {"rows", rows},
                         {"pass", all_ok}};
    write_text(a.report, report.dump(2) + "\n");
  }
  return all_ok ? 0 : kExitCheckFailed;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::string> var, engines, variants, rho_policy;
  std::optional<double> from, to;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> trials, seed;
  unsigned workers = 0;
  std::string out;
};

template <typename T>
T preset_value(const json& sweep, const char* key, const T& fallback) {
  if (sweep.is_null() || !sweep.contains(key)) return fallback;
  try {
    return sweep.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("sweep: bad value for \"") + key + "\"");
  }
}

std::string preset_list(const json& sweep, const char* key,
                        const std::string& fallback) {
  if (sweep.is_null() || !sweep.contains(key)) return fallback;
  const auto& v = sweep.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_array()) throw ConfigError(std::string("sweep: bad \"") + key + "\"");
  std::string joined;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(std::string("sweep: bad \"") + key + "\"");
    joined += (joined.empty() ? "" : ",") + e.get<std::string>();
  }
  return joined;
}

int run_sweep_command(const SweepArgs& a, std::uint64_t default_trials) {
  const Loaded cfg = load_config(a.config, a.overrides);
  const json& p = cfg.sweep;
  if (!p.is_null()) {
    if (!p.is_object()) throw ConfigError("\"sweep\" must be an object");
    detail::reject_unknown(p,
                           {"variable", "from", "to", "steps", "engines",
                            "variants", "rho_policy", "trials", "seed"},
                           "sweep");
  }

  SweepSpec spec;
  const std::string var = a.var.value_or(preset_value<std::string>(p, "variable", ""));
  if (var.empty()) throw ConfigError("sweep: --var is required");
  spec.variable = parse_sweep_variable(var);
  spec.from = a.from.value_or(preset_value<double>(p, "from", NAN));
  spec.to = a.to.value_or(preset_value<double>(p, "to", NAN));
  spec.steps = a.steps.value_or(preset_value<std::size_t>(p, "steps", 0));
  spec.engines.clear();
  for (const auto& e : split_list(a.engines.value_or(preset_list(p, "engines", "analytic_full")))) {
    spec.engines.push_back(parse_engine(e));
  }
  spec.variants.clear();
  for (const auto& v : split_list(a.variants.value_or(preset_list(p, "variants", "incremental")))) {
    spec.variants.push_back(parse_variant(v));
  }
  spec.rho_policy =
      parse_rho_policy(a.rho_policy.value_or(preset_value<std::string>(p, "rho_policy", "fixed")));
  spec.trials = a.trials.value_or(preset_value<std::uint64_t>(p, "trials", default_trials));
  spec.seed = a.seed.value_or(preset_value<std::uint64_t>(p, "seed", 42));
  spec.workers = a.workers;

  const SweepResult r = run_sweep(cfg.series, spec);
  write_csv(r, a.out);
  write_metadata(r, spec, a.out);
  write_plot_script(r, a.out);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("wrote %s (%zu rows, %zu columns), %s.meta.json, %s.plot.py\n",
              a.out.c_str(), r.rows.size(), r.columns.size(), a.out.c_str(),
              a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string target = "rho";
  std::string engine = "analytic";
  std::string variant = "incremental";
  double from = 0.5;
  double to = 8.0;
  double tol = 1e-4;
  std::uint64_t trials = 200'000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  std::string json_out;
};

const char* method_name(OptMethod m) {
  switch (m) {
    case OptMethod::closed_form: return "closed_form";
    case OptMethod::golden_section: return "golden_section";
    case OptMethod::grid: return "grid";
  }
  return "?";
}

std::optional<double> try_closed(double (*f)(const SystemParams&),
                                 const SystemParams& sys) {
  try {
    return f(sys);
  } catch (const RegimeError&) {
    return std::nullopt;
  }
}

int run_optimize(const OptimizeArgs& a) {
  const Loaded cfg = load_config(a.config, a.overrides);
  const SystemParams sys = cfg.base.system();
  McObjectiveOptions mc{a.trials, a.seed, McOptions{a.workers}};
  const bool no_direct = a.variant == "no_direct" || a.variant == "no_direct_two_hop";
  if (!no_direct && a.variant != "incremental") {
    throw ConfigError("optimize: --variant must be incremental or no_direct");
  }

  print_scenario_header(cfg.base, sys);
  json out = {{"target", a.target}, {"engine", a.engine}, {"variant", a.variant}};
  OptResult r;

  if (a.target == "rho") {
    RhoObjective obj;
    if (a.engine == "analytic") {
      obj = no_direct ? RhoObjective::tau_no_direct : RhoObjective::tau_full;
    } else if (a.engine == "sim" && !no_direct) {
      obj = RhoObjective::tau_sim;
    } else if (a.engine == "mc" && !no_direct) {
      obj = RhoObjective::tau_mc;
    } else {
      throw ConfigError("optimize: engine " + a.engine + " does not support variant " +
                        a.variant);
    }
    const auto rho_star = try_closed(rho_star_closed_form, sys);
    const auto rho_star_nd = try_closed(rho_star_no_direct, sys);
    r = maximize_rho(sys, obj, a.tol, mc);
    const auto reference = no_direct ? rho_star_nd : rho_star;

    std::printf("\nclosed-form rho*     %s\n", rho_star ? fmt(*rho_star).c_str() : "outside (0,1)");
    std::printf("closed-form rho*_nd  %s\n", rho_star_nd ? fmt(*rho_star_nd).c_str() : "outside (0,1)");
    std::printf("numeric optimum      %s  (tau %s)\n", fmt(r.arg_opt).c_str(),
                fmt(r.value_opt).c_str());
    if (reference) {
      std::printf("gap                  %s\n", fmt(r.arg_opt - *reference).c_str());
    }
    out["rho_star"] = rho_star ? json(*rho_star) : json(nullptr);
    out["rho_star_nd"] = rho_star_nd ? json(*rho_star_nd) : json(nullptr);
    out["gap"] = reference ? json(r.arg_opt - *reference) : json(nullptr);
  } else if (a.target == "rs") {
    if (no_direct) throw ConfigError("optimize: --target rs supports incremental only");
    RsObjective obj;
    if (a.engine == "analytic") obj = RsObjective::tau_full;
    else if (a.engine == "mc") obj = RsObjective::tau_mc;
    else throw ConfigError("optimize: --target rs needs --engine analytic or mc");
    r = maximize_rs(sys, a.from, a.to, obj, mc, a.tol);
    const double rho_at = rho_for_rate(sys.with_rs(r.arg_opt));
    std::printf("\nrange                [%s, %s]\n", fmt(a.from).c_str(), fmt(a.to).c_str());
    std::printf("numeric optimum rs   %s  (tau %s, rho %s)\n", fmt(r.arg_opt).c_str(),
                fmt(r.value_opt).c_str(), fmt(rho_at).c_str());
    out["rho_at_optimum"] = rho_at;
  } else {
    throw ConfigError("optimize: --target must be rho or rs");
  }

  std::printf("method               %s, %llu evaluations%s\n", method_name(r.method),
              static_cast<unsigned long long>(r.evaluations),
              r.fallback ? ", grid FALLBACK (objective not unimodal)" : "");
  out["arg_opt"] = r.arg_opt;
  out["value_opt"] = r.value_opt;
  out["method"] = method_name(r.method);
  out["evaluations"] = r.evaluations;
  out["fallback"] = r.fallback;
  std::printf("%s\n", out.dump().c_str());
  if (!a.json_out.empty()) write_text(a.json_out, out.dump(2) + "\n");
  return r.fallback ? kExitFallback : 0;
}

template <typename F>
int guarded_run(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return kExitScenario;
  } catch (const RegimeError& e) {
    std::fprintf(stderr, "scenario outside the model's validity regime: %s\n", e.what());
    return kExitScenario;
  } catch (const DegenerateRhoError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return kExitScenario;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental DF relaying with an energy-harvesting relay: "
               "closed forms, Monte Carlo and optimization"};
  app.set_version_flag("--version", EHRELAY_VERSION);
  app.require_subcommand(1);

  // Default trial count; --trials always wins.
  std::uint64_t default_trials = 1'000'000;
  if (const char* env = std::getenv("EHRELAY_TRIALS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      std::fprintf(stderr, "error: EHRELAY_TRIALS must be a positive integer\n");
      return kExitConfig;
    }
    default_trials = v;
  }

  ValidateArgs va;
  va.trials = default_trials;
  auto* validate = app.add_subcommand("validate", "Closed forms next to Monte Carlo estimates");
  validate->add_option("config", va.config, "Scenario or preset JSON")->required();
  validate->add_option("overrides", va.overrides, "key=value overrides");
  validate->add_option("--trials", va.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  validate->add_option("--seed", va.seed, "Random seed");
  validate->add_option("--workers", va.workers, "Threads (0: all cores)");
  validate->add_option("--report", va.report, "Also write the report as JSON");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Tabulate throughput over one parameter");
  sweep->add_option("config", sa.config, "Scenario or preset JSON")->required();
  sweep->add_option("overrides", sa.overrides, "key=value overrides");
  sweep->add_option("--var", sa.var, "rho | rs | i_over_no_db | d_sr");
  sweep->add_option("--from", sa.from);
  sweep->add_option("--to", sa.to);
  sweep->add_option("--steps", sa.steps);
  sweep->add_option("--engines", sa.engines, "Comma list of analytic_full, analytic_sim, mc");
  sweep->add_option("--variants", sa.variants,
                    "Comma list of incremental, direct_only, no_direct_two_hop");
  sweep->add_option("--rho-policy", sa.rho_policy, "fixed | optimum");
  sweep->add_option("--trials", sa.trials)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sa.seed);
  sweep->add_option("--workers", sa.workers, "Threads (0: all cores)");
  sweep->add_option("--out", sa.out, "Output CSV")->required();

  OptimizeArgs oa;
  oa.trials = std::min<std::uint64_t>(default_trials, 200'000);
  auto* optimize = app.add_subcommand("optimize", "Optimal power split or rate");
  optimize->add_option("config", oa.config, "Scenario or preset JSON")->required();
  optimize->add_option("overrides", oa.overrides, "key=value overrides");
  optimize->add_option("--target", oa.target, "rho | rs");
  optimize->add_option("--engine", oa.engine, "analytic | sim | mc");
  optimize->add_option("--variant", oa.variant, "incremental | no_direct");
  optimize->add_option("--from", oa.from, "Lower end of the rate range");
  optimize->add_option("--to", oa.to, "Upper end of the rate range");
  optimize->add_option("--tol", oa.tol, "Search tolerance");
  optimize->add_option("--trials", oa.trials, "Trials per Monte Carlo evaluation")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--seed", oa.seed);
  optimize->add_option("--workers", oa.workers, "Threads (0: all cores)");
  optimize->add_option("--json", oa.json_out, "Also write the result as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*validate) return guarded_run([&] { return run_validate(va); });
  if (*sweep) return guarded_run([&] { return run_sweep_command(sa, default_trials); });
  return guarded_run([&] {
    try {
      return run_optimize(oa);
    } catch (const std::invalid_argument& e) {
      if (dynamic_cast<const ScenarioError*>(&e)) throw;
      throw ConfigError(e.what());
    }
  });
}
