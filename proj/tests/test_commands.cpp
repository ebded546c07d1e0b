#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "excitrans/commands.hpp"
#include "excitrans/errors.hpp"

namespace excitrans {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("excitrans_test_" + std::string(info->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  RunOptions options(const std::string& sub, int threads = 1) const {
    RunOptions o;
    o.out_dir = root_ / sub;
    o.threads = threads;
    return o;
  }

  fs::path root_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Scenario short_scenario(json extra = json::object()) {
  json doc = {{"times", {{"T_L", 2.0}, {"T", 10.0}, {"dt", 0.01}}},
              {"adam", {{"iterations", 2}}},
              {"restarts", 2}};
  doc.merge_patch(extra);
  return scenario_from_json(doc);
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Format, SinkRatio) {
  EXPECT_EQ(sink_ratio(0.5, 0.25), 2.0);
  EXPECT_TRUE(std::isnan(sink_ratio(0.5, 1e-13)));
}

TEST_F(Commands, SimulateWritesTrajectory) {
  const Scenario s = short_scenario();
  ASSERT_EQ(run_simulate(s, options("sim")), kExitOk);
  const auto rows = lines(root_ / "sim" / "trajectory.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "t,p_rad,p_ant,p_site_1,p_site_2,p_site_3,p_site_4,p_sink,trace,sink_integral");
  EXPECT_EQ(rows[1], "0,1,0,0,0,0,0,0,1,0");
  EXPECT_TRUE(rows.back().rfind("10,", 0) == 0);
  const json m = json::parse(read_file(root_ / "sim" / "manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(scenario_to_json(scenario_from_json(m["scenario"])), scenario_to_json(s));
  EXPECT_TRUE(m["convergence"][0]["converged"].get<bool>());
}

TEST_F(Commands, SinkInitialStateStaysInSink) {
  const Scenario s = short_scenario({{"initial_state", "sink"}});
  ASSERT_EQ(run_simulate(s, options("sim")), kExitOk);
  const auto rows = lines(root_ / "sim" / "trajectory.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::vector<std::string> cells;
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    EXPECT_EQ(cells[7], "1");
  }
}

TEST_F(Commands, IdenticalMembersHaveUnitRatio) {
  const Scenario s = short_scenario({{"compare", {{{"label", "a"}}, {{"label", "b"}}}}});
  ASSERT_EQ(run_compare(s, options("cmp")), kExitOk);
  const auto rows = lines(root_ / "cmp" / "ratio.csv");
  EXPECT_EQ(rows[0], "t,ratio_a,ratio_b");
  EXPECT_EQ(rows[1], "0,,");  // p_sink(0) = 0: no ratio
  for (std::size_t i = 2; i < rows.size(); ++i)
    EXPECT_EQ(rows[i].substr(rows[i].find(',')), ",1,1");
  EXPECT_FALSE(fs::exists(root_ / "cmp" / "params_a.json"));
}

TEST_F(Commands, CompareRejectsMismatchedGrids) {
  const Scenario s = short_scenario(
      {{"compare", {{{"label", "a"}, {"patch", {{"times", {{"dt", 0.005}}}}}}}}});
  std::ostringstream err;
  EXPECT_EQ(run_command("compare", s, options("cmp"), err), kExitConfig);
  EXPECT_NE(err.str().find("time grid"), std::string::npos);
}

TEST_F(Commands, OptimizeWithZeroIterations) {
  const Scenario s = short_scenario({{"strategy", "couplings"}, {"adam", {{"iterations", 0}}}});
  ASSERT_EQ(run_optimize(s, options("opt")), kExitOk);
  const json p = json::parse(read_file(root_ / "opt" / "params.json"));
  EXPECT_EQ(read_file(root_ / "opt" / "trajectory_unoptimized.csv"),
            read_file(root_ / "opt" / "trajectory_optimized.csv"));
  EXPECT_FALSE(p.empty());
}

TEST_F(Commands, OptimizeWithoutStrategyIsConfigError) {
  std::ostringstream err;
  EXPECT_EQ(run_command("optimize", short_scenario(), options("opt"), err), kExitConfig);
}

TEST_F(Commands, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  const Scenario s = short_scenario(
      {{"strategy", "driving"},
       {"compare", {{{"label", "R1"}}, {{"label", "couplings"}, {"patch", {{"strategy", "couplings"}}}}}}});
  ASSERT_EQ(run_compare(s, options("a", 1)), kExitOk);
  ASSERT_EQ(run_compare(s, options("b", 1)), kExitOk);
  ASSERT_EQ(run_compare(s, options("c", 3)), kExitOk);
  for (const auto& entry : fs::directory_iterator(root_ / "a")) {
    const std::string name = entry.path().filename().string();
    const std::string a = read_file(entry.path());
    EXPECT_EQ(a, read_file(root_ / "b" / name)) << name;
    EXPECT_EQ(a, read_file(root_ / "c" / name)) << name;
  }
}

TEST_F(Commands, SweepFindsFirstMaximum) {
  const Scenario s = short_scenario({{"sweep", {{"omega_min", 0.1}, {"omega_max", 0.5}, {"omega_step", 0.1}}}});
  const SweepResult r = sweep_omega(s, 1);
  ASSERT_EQ(r.omegas.size(), 5u);
  for (double v : r.objectives) EXPECT_LE(v, r.objectives[r.argmax]);
  ASSERT_EQ(run_sweep(s, options("sw")), kExitOk);
  EXPECT_EQ(lines(root_ / "sw" / "sweep.csv").size(), 6u);
}

TEST_F(Commands, VerifyPassesOnReferenceScenario) {
  const Scenario s = short_scenario();
  const auto checks = verify_scenario(s, 1);
  EXPECT_EQ(checks.size(), 9u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_EQ(run_verify(s, options("v")), kExitOk);
}

TEST_F(Commands, VerifyFailsOnUnstableStep) {
  const Scenario s = scenario_from_json({{"network", {{"kind", "fmo"}}},
                                         {"times", {{"T_L", 10.0}, {"T", 10.0}, {"dt", 0.1}}}});
  std::ostringstream err;
  EXPECT_EQ(run_command("verify", s, options("v"), err), kExitVerification);
  EXPECT_EQ(run_command("simulate", s, options("s"), err), kExitDiverged);
}

TEST_F(Commands, StrictConvergenceFailsOnCoarseStep) {
  const Scenario s = scenario_from_json(
      {{"network", {{"kind", "fmo"}}}, {"times", {{"T_L", 10.0}, {"T", 10.0}, {"dt", 0.01}}}});
  RunOptions o = options("s");
  o.strict_convergence = true;
  std::ostringstream err;
  EXPECT_EQ(run_command("simulate", s, o, err), kExitVerification);
}

TEST(GradientCheck, MatchesOnReferenceModel) {
  const Scenario s = short_scenario();
  const GradientCheck g = check_gradient(s.model(), Strategy::couplings(),
                                         gradient_check_point(s, Strategy::couplings()), 2.0, 0.01);
  EXPECT_LT(g.max_relative_error, 1e-4);
  EXPECT_EQ(g.forward.size(), 2);
}

}  // namespace
}  // namespace excitrans
