#ifndef EHRELAY_SWEEP_HPP
#define EHRELAY_SWEEP_HPP

// One-dimensional parameter sweeps over one or more scenario series,
// written as CSV plus a metadata sidecar and a plotting script.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ehrelay/analytic.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/montecarlo.hpp"
#include "ehrelay/optimize.hpp"
#include "ehrelay/scenario.hpp"

#ifndef EHRELAY_VERSION
#define EHRELAY_VERSION "0.0.0"
#endif

namespace ehrelay {

enum class SweepVariable { rho, rs, i_over_no_db, d_sr };
enum class Engine { analytic_full, analytic_sim, mc };
enum class RhoPolicy { fixed, optimum };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::rho: return "rho";
    case SweepVariable::rs: return "rs";
    case SweepVariable::i_over_no_db: return "i_over_no_db";
    case SweepVariable::d_sr: return "d_sr";
  }
  return "?";
}

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::analytic_full: return "analytic_full";
    case Engine::analytic_sim: return "analytic_sim";
    case Engine::mc: return "mc";
  }
  return "?";
}

inline const char* to_string(McVariant v) {
  switch (v) {
    case McVariant::incremental: return "incremental";
    case McVariant::no_direct_two_hop: return "no_direct_two_hop";
    case McVariant::direct_only: return "direct_only";
    case McVariant::no_rp_constraint: return "no_rp_constraint";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "rho") return SweepVariable::rho;
  if (s == "rs") return SweepVariable::rs;
  if (s == "i_over_no_db") return SweepVariable::i_over_no_db;
  if (s == "d_sr") return SweepVariable::d_sr;
  throw ConfigError("unknown sweep variable \"" + s + "\"");
}

inline Engine parse_engine(const std::string& s) {
  if (s == "analytic_full" || s == "analytic") return Engine::analytic_full;
  if (s == "analytic_sim" || s == "sim") return Engine::analytic_sim;
  if (s == "mc") return Engine::mc;
  throw ConfigError("unknown engine \"" + s + "\"");
}

inline McVariant parse_variant(const std::string& s) {
  if (s == "incremental") return McVariant::incremental;
  if (s == "direct_only") return McVariant::direct_only;
  if (s == "no_direct_two_hop") return McVariant::no_direct_two_hop;
  throw ConfigError("unknown variant \"" + s + "\"");
}

inline RhoPolicy parse_rho_policy(const std::string& s) {
  if (s == "fixed") return RhoPolicy::fixed;
  if (s == "optimum") return RhoPolicy::optimum;
  throw ConfigError("unknown rho policy \"" + s + "\"");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::rho;
  double from = 0.01;
  double to = 0.99;
  std::size_t steps = 99;
  std::vector<Engine> engines{Engine::analytic_full};
  std::vector<McVariant> variants{McVariant::incremental};
  RhoPolicy rho_policy = RhoPolicy::fixed;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (!(from < to) || !std::isfinite(from) || !std::isfinite(to)) {
      throw ConfigError("sweep: need finite from < to");
    }
    if (steps < 2 || steps > 10'000) {
      throw ConfigError("sweep: steps must lie in [2, 10000]");
    }
    if (engines.empty()) throw ConfigError("sweep: no engines");
    if (variants.empty()) throw ConfigError("sweep: no variants");
    for (auto v : variants) {
      if (v == McVariant::no_rp_constraint) {
        throw ConfigError("sweep: unsupported variant no_rp_constraint");
      }
    }
    if (variable == SweepVariable::rho && rho_policy == RhoPolicy::optimum) {
      throw ConfigError("sweep: rho_policy optimum conflicts with --var rho");
    }
    if (trials == 0) throw ConfigError("sweep: trials must be >= 1");
  }

  double x(std::size_t i) const {
    return from + (to - from) * static_cast<double>(i) /
                      static_cast<double>(steps - 1);
  }
};

struct Series {
  std::string label;  // empty for a single unnamed series
  Scenario scenario;
};

struct SweepResult {
  std::vector<std::string> columns;  // columns[0] is the swept variable
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
};

namespace detail {

inline Scenario at_point(Scenario s, SweepVariable v, double x) {
  switch (v) {
    case SweepVariable::rho: s.rho = x; break;
    case SweepVariable::rs: s.rs = x; break;
    case SweepVariable::i_over_no_db:
      s.i_over_no_in_db = true;
      s.i_over_no_value = x;
      break;
    case SweepVariable::d_sr:
      if (!s.geometry) {
        throw ConfigError("sweep over d_sr needs a geometry scenario");
      }
      s.geometry->d_sr = x;
      break;
  }
  return s;
}

inline std::vector<std::string> series_columns(const Series& series,
                                               const SweepSpec& spec) {
  const std::string prefix = series.label.empty() ? "" : series.label + ".";
  std::vector<std::string> cols;
  if (spec.rho_policy == RhoPolicy::optimum) cols.push_back(prefix + "rho");
  for (auto e : spec.engines) {
    for (auto v : spec.variants) {
      const std::string base = prefix + to_string(e) + "." + to_string(v);
      cols.push_back(base + ".tau");
      if (e == Engine::mc) cols.push_back(base + ".stderr");
      if (e == Engine::analytic_full && v == McVariant::incremental) {
        for (const char* p : {"p1", "p2", "p3", "q1", "q2"}) {
          cols.push_back(base + "." + p);
        }
      }
    }
  }
  return cols;
}

// Analytic value or NaN with a warning when the formula is outside its
// validity regime at this point.
template <typename F>
double guarded(F&& f, std::vector<std::string>& warnings, const std::string& where) {
  try {
    return f();
  } catch (const RegimeError& e) {
    warnings.push_back(where + ": " + e.what());
  } catch (const DegenerateRhoError& e) {
    warnings.push_back(where + ": " + e.what());
  }
  return std::nan("");
}

inline void evaluate_series(const Series& series, const SweepSpec& spec,
                            double x, std::vector<double>& row,
                            std::vector<std::string>& warnings) {
  const Scenario s = at_point(series.scenario, spec.variable, x);
  SystemParams sys = s.system();
  char where_buf[64];
  std::snprintf(where_buf, sizeof where_buf, "%s=%.9g", to_string(spec.variable), x);
  const std::string where =
      (series.label.empty() ? "" : series.label + " ") + where_buf;

  if (spec.rho_policy == RhoPolicy::optimum) {
    sys = sys.with_rho(rho_for_rate(sys));
    row.push_back(sys.rho());
  }
  for (auto e : spec.engines) {
    for (auto v : spec.variants) {
      switch (e) {
        case Engine::analytic_full:
          if (v == McVariant::incremental) {
            OutageBreakdown b;
            const double tau = guarded(
                [&] {
                  b = tau_incremental(sys);
                  return b.tau;
                },
                warnings, where);
            row.push_back(tau);
            for (double p : {b.p1, b.p2, b.p3, b.q1, b.q2}) {
              row.push_back(std::isnan(tau) ? std::nan("") : p);
            }
          } else if (v == McVariant::direct_only) {
            row.push_back(sys.rs() * q2_direct_success(sys));
          } else {
            row.push_back(guarded([&] { return tau_no_direct(sys); }, warnings,
                                  where));
          }
          break;
        case Engine::analytic_sim:
          if (v == McVariant::incremental) {
            row.push_back(guarded([&] { return tau_simplified(sys); }, warnings,
                                  where));
          } else if (v == McVariant::direct_only) {
            row.push_back(sys.rs() * q2_direct_success(sys));
          } else {
            row.push_back(guarded([&] { return tau_simplified_no_direct(sys); },
                                  warnings, where));
          }
          break;
        case Engine::mc: {
          const McEstimate est =
              estimate_variant(sys, spec.trials, spec.seed, v, McOptions{1});
          row.push_back(est.mean);
          row.push_back(est.std_error);
          break;
        }
      }
    }
  }
}

}  // namespace detail

/// Evaluates every series at each sweep point. Points run concurrently;
/// rows come back in x order, and every point reuses the same seed.
inline SweepResult run_sweep(const std::vector<Series>& series,
                             const SweepSpec& spec) {
  spec.validate();
  if (series.empty()) throw ConfigError("sweep: no series");

  SweepResult result;
  result.seed = spec.seed;
  result.trials = spec.trials;
  result.columns.push_back(to_string(spec.variable));
  nlohmann::json canonical = nlohmann::json::array();
  for (const auto& s : series) {
    for (auto& c : detail::series_columns(s, spec)) result.columns.push_back(c);
    canonical.push_back({{"label", s.label}, {"scenario", s.scenario.to_json()}});
  }
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical.dump())));
    result.scenario_hash = buf;
  }

  const std::size_t n = spec.steps;
  result.rows.resize(n);
  std::vector<std::vector<std::string>> warnings(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const double x = spec.x(i);
        auto& row = result.rows[i];
        row.push_back(x);
        for (const auto& s : series) {
          detail::evaluate_series(s, spec, x, row, warnings[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  unsigned workers = spec.workers ? spec.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    for (auto& w : warnings[i]) result.warnings.push_back(std::move(w));
  }
  return result;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv(const SweepResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    out << (c ? "," : "") << r.columns[c];
  }
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_number(row[c]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

/// <csv>.meta.json: everything needed to reproduce the CSV, plus the only
/// time-dependent field.
inline void write_metadata(const SweepResult& r, const SweepSpec& spec,
                           const std::string& csv_path) {
  nlohmann::json engines = nlohmann::json::array();
  for (auto e : spec.engines) engines.push_back(to_string(e));
  nlohmann::json variants = nlohmann::json::array();
  for (auto v : spec.variants) variants.push_back(to_string(v));
  const nlohmann::json meta = {
      {"csv", std::filesystem::path(csv_path).filename().string()},
      {"scenario_hash", r.scenario_hash},
      {"seed", r.seed},
      {"trials", r.trials},
      {"version", EHRELAY_VERSION},
      {"timestamp", utc_timestamp()},
      {"sweep",
       {{"variable", to_string(spec.variable)},
        {"from", spec.from},
        {"to", spec.to},
        {"steps", spec.steps},
        {"engines", engines},
        {"variants", variants},
        {"rho_policy", spec.rho_policy == RhoPolicy::fixed ? "fixed" : "optimum"}}},
      {"columns", r.columns},
      {"warnings", r.warnings.size()}};
  write_text(csv_path + ".meta.json", meta.dump(2) + "\n");
}

/// <csv>.plot.py: matplotlib script plotting every tau column against x.
inline void write_plot_script(const SweepResult& r, const std::string& csv_path) {
  const std::string name = std::filesystem::path(csv_path).filename().string();
  std::string script =
      "#!/usr/bin/env python3\n"
      "# Plots the tau columns of " + name + " against " + r.columns[0] + ".\n"
      "import csv\n"
      "import os\n"
      "import sys\n"
      "\n"
      "import matplotlib\n"
      "matplotlib.use(\"Agg\")\n"
      "import matplotlib.pyplot as plt\n"
      "\n"
      "here = os.path.dirname(os.path.abspath(__file__))\n"
      "path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, \"" + name + "\")\n"
      "with open(path, newline=\"\") as f:\n"
      "    rows = list(csv.reader(f))\n"
      "header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]\n"
      "x = [r[0] for r in data]\n"
      "fig, ax = plt.subplots(figsize=(8, 5))\n"
      "ax.set_prop_cycle(color=plt.cm.tab20.colors)\n"
      "for c, col in enumerate(header):\n"
      "    if not col.endswith(\".tau\"):\n"
      "        continue\n"
      "    y = [r[c] for r in data]\n"
      "    err = header.index(col[:-4] + \".stderr\") if col[:-4] + \".stderr\" in header else None\n"
      "    if err is None:\n"
      "        ax.plot(x, y, label=col[:-4])\n"
      "    else:\n"
      "        ax.errorbar(x, y, yerr=[3 * r[err] for r in data], fmt=\"o\", ms=3, label=col[:-4])\n"
      "# the simplified throughput is not a probability mix and can go negative\n"
      "ax.set_ylim(bottom=0)\n"
      "ax.set_xlabel(header[0])\n"
      "ax.set_ylabel(\"throughput (bits/channel use)\")\n"
      "ax.grid(True, alpha=0.3)\n"
      "ax.legend(fontsize=7)\n"
      "fig.tight_layout()\n"
      "out = os.path.splitext(path)[0] + \".png\"\n"
      "fig.savefig(out, dpi=150)\n"
      "print(out)\n";
  write_text(csv_path + ".plot.py", script);
}

}  // namespace ehrelay

#endif  // EHRELAY_SWEEP_HPP
