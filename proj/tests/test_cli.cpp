#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ehrelay/scenario.hpp"
#include "ehrelay/sweep.hpp"
#include "fixtures.hpp"

namespace ehrelay {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::reference_system;

json default_json() {
  return json::parse(R"({
    "geometry": {"d_sr": 1.2, "d_sd": 3.0, "d_sp": 3.0, "d_rp": 3.0},
    "epsilon": 4.0, "eta": 0.7, "rho": 0.5, "rs": 3.0, "i_over_no_db": 6.0
  })");
}

TEST(Scenario, DefaultMatchesReferenceSystem) {
  const auto s = parse_scenario(default_json()).system();
  const auto ref = reference_system(0.5);
  EXPECT_EQ(s.links(), ref.links());
  EXPECT_DOUBLE_EQ(s.i_over_no(), ref.i_over_no());
  EXPECT_DOUBLE_EQ(s.links().lambda_rd, std::pow(1.8, 4.0));
}

TEST(Scenario, LinearReadingAndLambdas) {
  auto j = json::parse(R"({
    "lambdas": {"sr": 2, "rd": 10, "sd": 81, "sp": 81, "rp": 81},
    "eta": 0.7, "rho": 0.5, "rs": 3, "i_over_no_linear": 6
  })");
  const auto s = parse_scenario(j);
  EXPECT_DOUBLE_EQ(s.system().i_over_no(), 6.0);
  EXPECT_DOUBLE_EQ(s.system().links().lambda_rd, 10.0);
}

TEST(Scenario, StructuralErrors) {
  auto both = default_json();
  both["lambdas"] = {{"sr", 1}, {"rd", 1}, {"sd", 1}, {"sp", 1}, {"rp", 1}};
  EXPECT_THROW(parse_scenario(both), ConfigError);

  auto neither_reading = default_json();
  neither_reading.erase("i_over_no_db");
  EXPECT_THROW(parse_scenario(neither_reading), ConfigError);

  auto two_readings = default_json();
  two_readings["i_over_no_linear"] = 6.0;
  EXPECT_THROW(parse_scenario(two_readings), ConfigError);

  auto unknown = default_json();
  unknown["colour"] = "blue";
  EXPECT_THROW(parse_scenario(unknown), ConfigError);

  auto wrong_type = default_json();
  wrong_type["rho"] = "half";
  EXPECT_THROW(parse_scenario(wrong_type), ConfigError);

  auto commented = default_json();
  commented["comment"] = "ignored";
  EXPECT_NO_THROW(parse_scenario(commented));
}

TEST(Scenario, BadValuesAreScenarioErrors) {
  auto j = default_json();
  j["rho"] = 1.5;
  const auto s = parse_scenario(j);
  EXPECT_THROW(s.system(), ScenarioError);
}

TEST(Scenario, Overrides) {
  auto s = parse_scenario(default_json());
  apply_override(s, "d_sr=1.7");
  apply_override(s, "i_over_no_linear=6");
  EXPECT_DOUBLE_EQ(s.system().links().lambda_rd, std::pow(1.3, 4.0));
  EXPECT_DOUBLE_EQ(s.system().i_over_no(), 6.0);
  EXPECT_THROW(apply_override(s, "lambda_sr=2"), ConfigError);
  EXPECT_THROW(apply_override(s, "rho"), ConfigError);
  EXPECT_THROW(apply_override(s, "rho=abc"), ConfigError);
  EXPECT_THROW(apply_override(s, "rho=0.5x"), ConfigError);
  EXPECT_THROW(apply_override(s, "nope=1"), ConfigError);
}

TEST(Scenario, HashIgnoresCommentsButNotValues) {
  auto a = default_json();
  auto b = default_json();
  b["comment"] = "x";
  EXPECT_EQ(scenario_hash(parse_scenario(a)), scenario_hash(parse_scenario(b)));
  b["rho"] = 0.51;
  EXPECT_NE(scenario_hash(parse_scenario(a)), scenario_hash(parse_scenario(b)));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(SweepSpec, Validation) {
  SweepSpec spec;
  spec.from = 0.5;
  spec.to = 0.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.to = 0.9;
  spec.steps = 1;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.steps = 10'001;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.steps = 10;
  spec.rho_policy = RhoPolicy::optimum;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Sweep, RowsOrderedAndBreakdownsConsistent) {
  SweepSpec spec;
  spec.engines = {Engine::analytic_full, Engine::mc};
  spec.variants = {McVariant::incremental};
  spec.trials = 20'000;
  spec.workers = 3;
  const auto r = run_sweep({{"", parse_scenario(default_json())}}, spec);
  ASSERT_EQ(r.rows.size(), 99u);
  ASSERT_EQ(r.columns.size(), 9u);
  EXPECT_EQ(r.columns[0], "rho");
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    ASSERT_EQ(row.size(), r.columns.size());
    if (i) EXPECT_GT(row[0], r.rows[i - 1][0]);
    const double tau = row[1], p1 = row[2], p2 = row[3], p3 = row[4],
                 q1 = row[5], q2 = row[6];
    for (double p : {p1, p2, p3, q1, q2}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
    EXPECT_NEAR(tau, 0.5 * 3.0 * q1 + 3.0 * q2, 1e-12);
  }
}

TEST(Sweep, DeterministicAcrossWorkers) {
  SweepSpec spec;
  spec.steps = 7;
  spec.engines = {Engine::mc};
  spec.trials = 10'000;
  spec.workers = 1;
  const std::vector<Series> series{{"", parse_scenario(default_json())}};
  const auto a = run_sweep(series, spec);
  spec.workers = 4;
  const auto b = run_sweep(series, spec);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.scenario_hash, b.scenario_hash);
}

TEST(Sweep, DirectOnlyIgnoresRho) {
  SweepSpec spec;
  spec.from = 0.2;
  spec.to = 0.8;
  spec.steps = 2;
  spec.engines = {Engine::analytic_full, Engine::mc};
  spec.variants = {McVariant::direct_only};
  spec.trials = 50'000;
  const auto r = run_sweep({{"", parse_scenario(default_json())}}, spec);
  ASSERT_EQ(r.rows.size(), 2u);
  for (std::size_t c = 1; c < r.columns.size(); ++c) {
    EXPECT_EQ(r.rows[0][c], r.rows[1][c]) << r.columns[c];
  }
}

TEST(Sweep, OptimumPolicyRecordsRho) {
  SweepSpec spec;
  spec.variable = SweepVariable::rs;
  spec.from = 1.0;
  spec.to = 5.0;
  spec.steps = 5;
  spec.rho_policy = RhoPolicy::optimum;
  const auto r = run_sweep({{"I=6dB", parse_scenario(default_json())}}, spec);
  EXPECT_EQ(r.columns[1], "I=6dB.rho");
  const auto at3 = reference_system(0.5).with_rs(3.0);
  EXPECT_DOUBLE_EQ(r.rows[2][1], rho_star_closed_form(at3));
}

TEST(Sweep, DsrNeedsGeometry) {
  auto j = json::parse(R"({
    "lambdas": {"sr": 2, "rd": 10, "sd": 81, "sp": 81, "rp": 81},
    "eta": 0.7, "rho": 0.5, "rs": 3, "i_over_no_db": 6
  })");
  SweepSpec spec;
  spec.variable = SweepVariable::d_sr;
  spec.from = 1.0;
  spec.to = 2.0;
  spec.steps = 3;
  EXPECT_THROW(run_sweep({{"", parse_scenario(j)}}, spec), ConfigError);
}

// ---- command line

std::string tool() { return EHRELAY_CLI_PATH; }
std::string presets() { return EHRELAY_PRESET_DIR; }

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "ehrelay_cli_test.log";
  const std::string cmd =
      env + " " + tool() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ehrelay_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string scenario() const { return presets() + "/scenario.json"; }
  fs::path dir_;
};

TEST_F(Cli, ValidateDefaultPasses) {
  const auto r = run("validate " + scenario() + " --trials 2000000");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  for (const char* q : {"p1", "p2", "q2", "p3", "tau"}) {
    EXPECT_NE(r.out.find(std::string("\n") + q), std::string::npos) << q;
  }
}

TEST_F(Cli, ValidateRhoZeroUsesDirectLimit) {
  const auto report = (dir_ / "report.json").string();
  const auto r = run("validate " + scenario() + " rho=0 --trials 1000000 --report " + report);
  EXPECT_EQ(r.code, 0) << r.out;
  const json j = json::parse(slurp(report));
  const auto sys = reference_system(0.0);
  for (const auto& row : j.at("rows")) {
    if (row.at("quantity") == "tau") {
      EXPECT_DOUBLE_EQ(row.at("closed_form").get<double>(),
                       3.0 * q2_direct_success(sys));
      EXPECT_TRUE(row.at("pass").get<bool>());
    }
  }
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("validate " + (dir_ / "missing.json").string()).code, 2);
  std::ofstream(dir_ / "broken.json") << "{ not json";
  EXPECT_EQ(run("validate " + (dir_ / "broken.json").string()).code, 2);
  EXPECT_EQ(run("validate " + scenario() + " nope=1").code, 2);
  EXPECT_EQ(run("validate " + scenario() + " rho=1.5").code, 3);
  EXPECT_EQ(run("validate " + scenario() + " eta=0").code, 3);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("sweep " + scenario() +
                " --var rho --from 0.1 --to 0.9 --steps 3 --out " +
                (dir_ / "no" / "such" / "dir.csv").string())
                .code,
            4);
  EXPECT_EQ(run("sweep " + scenario() +
                " --var rho --from 0.9 --to 0.1 --steps 3 --out " +
                (dir_ / "x.csv").string())
                .code,
            2);
  EXPECT_EQ(run("validate " + scenario(), "EHRELAY_TRIALS=zero").code, 2);
}

TEST_F(Cli, SweepIsByteReproducible) {
  const auto a = dir_ / "a.csv";
  const auto b = dir_ / "b.csv";
  const std::string args = "sweep " + presets() +
                           "/fig-tau-vs-rho.json --steps 9 --trials 20000 --out ";
  ASSERT_EQ(run(args + a.string()).code, 0);
  ASSERT_EQ(run(args + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_TRUE(fs::exists(a.string() + ".meta.json"));
  EXPECT_TRUE(fs::exists(a.string() + ".plot.py"));
  const json meta = json::parse(slurp(a.string() + ".meta.json"));
  EXPECT_EQ(meta.at("seed"), 42);
  EXPECT_EQ(meta.at("trials"), 20000);
  EXPECT_TRUE(meta.contains("timestamp"));
  EXPECT_EQ(slurp(a).find("timestamp"), std::string::npos);
}

TEST_F(Cli, EnvironmentSetsDefaultTrials) {
  const auto a = dir_ / "a.csv";
  const std::string args = "sweep " + scenario() +
                           " --var rho --from 0.2 --to 0.8 --steps 2 --engines mc --out " +
                           a.string();
  ASSERT_EQ(run(args, "EHRELAY_TRIALS=1234").code, 0);
  EXPECT_EQ(json::parse(slurp(a.string() + ".meta.json")).at("trials"), 1234);
  ASSERT_EQ(run(args + " --trials 999", "EHRELAY_TRIALS=1234").code, 0);
  EXPECT_EQ(json::parse(slurp(a.string() + ".meta.json")).at("trials"), 999);
}

TEST_F(Cli, OptimizeRho) {
  const auto out = dir_ / "opt.json";
  const auto r = run("optimize " + scenario() + " --engine sim --json " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(slurp(out));
  EXPECT_NEAR(j.at("rho_star").get<double>(), 0.87, 0.02);
  EXPECT_LT(std::abs(j.at("gap").get<double>()), 0.02);
  EXPECT_GT(j.at("rho_star_nd").get<double>(), j.at("rho_star").get<double>());
  EXPECT_FALSE(j.at("fallback").get<bool>());
}

TEST_F(Cli, OptimizeNoDirectAndRateRange) {
  const auto nd = dir_ / "nd.json";
  ASSERT_EQ(run("optimize " + scenario() + " --variant no_direct --json " + nd.string()).code, 0);
  const json j = json::parse(slurp(nd));
  EXPECT_GT(j.at("rho_star_nd").get<double>(), j.at("rho_star").get<double>());

  const auto rs = dir_ / "rs.json";
  ASSERT_EQ(run("optimize " + scenario() + " --target rs --from 3 --to 3 --json " +
                rs.string())
                .code,
            0);
  EXPECT_EQ(json::parse(slurp(rs)).at("arg_opt").get<double>(), 3.0);
  EXPECT_EQ(run("optimize " + scenario() + " --target rs --engine sim").code, 2);
}

TEST_F(Cli, GridFallbackExitsFive) {
  // 300 common-random-number trials give a ragged response surface.
  const auto out = dir_ / "fb.json";
  const auto r = run("optimize " + scenario() +
                     " --engine mc --trials 300 --seed 4 --tol 0.05 --json " +
                     out.string());
  EXPECT_EQ(r.code, 5) << r.out;
  EXPECT_TRUE(json::parse(slurp(out)).at("fallback").get<bool>());
}

}  // namespace
}  // namespace ehrelay
