#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bvm/errors.hpp"
#include "bvm/experiments.hpp"

using namespace bvm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bvm_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.n = 200;
  c.reps = 4;
  c.master_seed = 5;
  c.sampler.burnin = 100;
  c.sampler.draws = 200;
  c.sampler.thin = 1;
  c.prior.betabar = 1.0;
  return c;
}

TEST(Config, RoundTrip) {
  ScenarioConfig c = small_config();
  c.center_kind = CenterKind::kAipw;
  c.prior.kind = PriorKind::kPropensityDependent;
  c.truth.synthesized_density = true;
  c.pilot.kind = PilotKind::kSeriesLogistic;
  c.dp.base_mass = 2.5;
  c.truth.offset_b = 0.1;
  const std::string text = serialize(c);
  const ScenarioConfig back = parse_config_string(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(back.truth.offset_b, 0.1);
}

TEST(Config, CommentsBlankLinesAndPartialFiles) {
  const ScenarioConfig c = parse_config_string("# scenario\n\nn = 300\nprior.kind = riemann-liouville\n");
  EXPECT_EQ(c.n, 300u);
  EXPECT_EQ(c.prior.kind, PriorKind::kRiemannLiouville);
  EXPECT_EQ(c.reps, ScenarioConfig{}.reps);
}

TEST(Config, ErrorsNameTheField) {
  try {
    parse_config_string("reps = 0\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "reps");
  }
  try {
    parse_config_string("truth.colour = red\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "truth.colour");
  }
  try {
    parse_config_string("n = many\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "n");
  }
  EXPECT_THROW(parse_config_string("d = 2\nprior.kind = riemann-liouville\n"), ConfigError);
  EXPECT_THROW(parse_config_string("no equals sign\n"), ConfigError);
}

TEST(Config, SetValueAndKeys) {
  ScenarioConfig c;
  set_config_value(c, "sampler.chains", "3");
  set_config_value(c, "pilot.reuse", "true");
  EXPECT_EQ(c.sampler.chains, 3);
  EXPECT_TRUE(c.pilot.reuse);
  const auto keys = config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "density_prior.gammabar"), keys.end());
  EXPECT_THROW(set_config_value(c, "sampler.seed", "1"), ConfigError);
}

TEST(ResultCsv, HeaderAndNumbers) {
  EXPECT_EQ(result_csv_header(), "rep_id,seed,chi_true,chi_hat,post_mean,post_sd,ci_lo,ci_hi,covered,ks_dist,w1_dist\n");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  ResultRow r;
  r.rep_id = 2;
  r.seed = 7;
  r.covered = true;
  r.chi_true = 0.5;
  EXPECT_EQ(result_csv_line(r), "2,7,0.5,0,0,0,0,0,1,0,0\n");
}

TEST(RunScenario, OutputsAreBitwiseReproducible) {
  const fs::path a = fresh_dir("repro_a");
  const fs::path b = fresh_dir("repro_b");
  RunOptions one;
  one.jobs = 1;
  RunOptions two;
  two.jobs = 2;
  run_scenario(small_config(), a, one);
  run_scenario(small_config(), b, two);
  const std::string csv = slurp(a / "results.csv");
  EXPECT_EQ(csv, slurp(b / "results.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_FALSE(fs::exists(a / "results.incomplete"));
  EXPECT_EQ(slurp(a / "config.txt"), serialize(small_config()));
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(summary["reps"].get<int>(), 4);
  EXPECT_TRUE(summary.contains("coverage"));
  EXPECT_TRUE(summary["metadata"].contains("runtime_ms"));
  RunOptions other = one;
  other.seed = 6;
  const fs::path c = fresh_dir("repro_c");
  run_scenario(small_config(), c, other);
  EXPECT_NE(csv, slurp(c / "results.csv"));
}

TEST(RunScenario, FailureLeavesTheMarker) {
  ScenarioConfig c = small_config();
  c.n = 4;
  c.center_kind = CenterKind::kAipw;
  c.pilot.split_fraction = 0.1;  // rounds to an empty pilot set
  const fs::path dir = fresh_dir("failing");
  EXPECT_THROW(run_scenario(c, dir, RunOptions{1}), ArgumentError);
  EXPECT_TRUE(fs::exists(dir / "results.incomplete"));
}

TEST(Suites, Expansion) {
  const auto grid = expand_suite("smoothness-grid", {"reps=3"});
  ASSERT_EQ(grid.size(), 16u);
  for (const auto& cell : grid) EXPECT_EQ(cell.config.reps, 3);
  EXPECT_EQ(grid[5].x, 0.5);
  EXPECT_EQ(grid[5].y, 0.5);
  EXPECT_EQ(grid[5].label, "at-threshold");
  EXPECT_EQ(grid[0].label, "below");
  EXPECT_EQ(grid[15].label, "above");
  const auto robust = expand_suite("single-robustness", {});
  ASSERT_EQ(robust.size(), 6u);
  EXPECT_EQ(robust[1].config.prior.kind, PriorKind::kPropensityDependent);
  EXPECT_EQ(robust[0].config.center_kind, CenterKind::kAipw);
  EXPECT_EQ(expand_suite("dp-vs-density", {}).front().config.density_prior.enabled, true);
  EXPECT_THROW(expand_suite("everything", {}), ArgumentError);
  EXPECT_THROW(expand_suite("smoothness-grid", {"reps"}), ConfigError);
  EXPECT_THROW(expand_suite("smoothness-grid", {"reps=0"}), ConfigError);
}

TEST(Suites, SmoothnessFlag) {
  EXPECT_EQ(smoothness_flag(0.5, 0.5, 1), "at-threshold");
  EXPECT_EQ(smoothness_flag(1.0, 1.0, 2), "at-threshold");
  EXPECT_EQ(smoothness_flag(0.3, 0.3, 1), "below");
  EXPECT_EQ(smoothness_flag(0.25, 2.0, 1), "above");
}

TEST(Suites, FailingCellsAreIsolated) {
  const fs::path dir = fresh_dir("suite_fail");
  const SuiteReport r = run_suite("single-robustness", {"n=4", "pilot.split_fraction=0.1", "reps=1"}, dir,
                                  RunOptions{1});
  EXPECT_EQ(r.completed, 0u);
  EXPECT_EQ(r.failures.size(), 6u);
  const std::string summary = slurp(dir / "suite_summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1);
  const PlotsReport plots = emit_plots_data(dir);
  EXPECT_EQ(plots.rows, 0u);
  EXPECT_EQ(plots.skipped.size(), 6u);
}

TEST(Suites, SmallSuiteRuns) {
  const fs::path dir = fresh_dir("suite_ok");
  const SuiteReport r = run_suite("single-robustness",
                                  {"n=200", "reps=2", "sampler.draws=200", "sampler.burnin=100"}, dir, RunOptions{1});
  EXPECT_EQ(r.completed, 6u);
  EXPECT_TRUE(r.failures.empty());
  const PlotsReport plots = emit_plots_data(dir);
  EXPECT_EQ(plots.rows, 24u);
  EXPECT_NE(slurp(dir / "plots.csv").find("propensity-dependent:coverage"), std::string::npos);
}

TEST(Plots, EmptyDirectoryGivesTheHeader) {
  const fs::path dir = fresh_dir("plots_empty");
  const PlotsReport r = emit_plots_data(dir);
  EXPECT_EQ(r.rows, 0u);
  EXPECT_EQ(slurp(dir / "plots.csv"), "x,y,metric,value\n");
}

void fake_cell(const fs::path& dir, double x, double y, double coverage) {
  fs::create_directories(dir);
  std::ofstream(dir / "cell.json") << nlohmann::json{{"x", x}, {"y", y}}.dump();
  std::ofstream(dir / "summary.json")
      << nlohmann::json{{"coverage", coverage}, {"mean_sd_ratio", 1.0}, {"median_ks", 0.1}, {"median_w1", 0.2}}
             .dump();
}

TEST(Plots, GridOfCells) {
  const fs::path dir = fresh_dir("plots_grid");
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) fake_cell(dir / ("c" + std::to_string(i) + std::to_string(j)), i, j, 0.9);
  }
  fake_cell(dir / "partial", 9, 9, 0.1);
  std::ofstream(dir / "partial" / "results.incomplete") << "";
  const PlotsReport r = emit_plots_data(dir);
  EXPECT_EQ(r.rows, 36u);
  ASSERT_EQ(r.skipped, std::vector<std::string>{"partial"});
  const std::string csv = slurp(dir / "plots.csv");
  std::size_t coverage_rows = 0;
  for (std::size_t p = csv.find(",coverage,"); p != std::string::npos; p = csv.find(",coverage,", p + 1)) {
    ++coverage_rows;
  }
  EXPECT_EQ(coverage_rows, 9u);
  EXPECT_NE(csv.find("2,1,coverage,0.9\n"), std::string::npos);
}

TEST(Plots, SingleCell) {
  const fs::path dir = fresh_dir("plots_one");
  fake_cell(dir / "only", 0.5, 2, 0.95);
  emit_plots_data(dir);
  EXPECT_EQ(slurp(dir / "plots.csv"),
            "x,y,metric,value\n0.5,2,coverage,0.95\n0.5,2,mean_sd_ratio,1\n0.5,2,median_ks,0.1\n"
            "0.5,2,median_w1,0.2\n");
}

}  // namespace
