#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvm/errors.hpp"
#include "bvm/experiments.hpp"
#include "bvm/scenario.hpp"

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 0;
  bool pilot_reuse = false;
  std::vector<std::string> sets;

  bvm::RunOptions options() const {
    bvm::RunOptions o;
    o.jobs = jobs;
    o.seed = seed;
    if (pilot_reuse) o.pilot_reuse = true;
    return o;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed (overrides the config)");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app->add_flag("--pilot-reuse", c.pilot_reuse, "Fit the pilot on the inference sample");
  app->add_option("--set", c.sets, "Override a config key, key=value (repeatable)");
}

void print_table(const std::string& title, const bvm::CoverageTable& t) {
  std::cout << title << ": reps=" << t.reps << " coverage=" << t.coverage << " (se " << t.coverage_se
            << ") sd_ratio=" << t.mean_sd_ratio << " median_ks=" << t.median_ks
            << " median_w1=" << t.median_w1 << '\n';
}

void apply_sets(bvm::ScenarioConfig& config, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw bvm::ConfigError(s, "override must be key=value");
    bvm::set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric Bernstein-von Mises experiments for the missing-at-random mean response"};
  app.require_subcommand(1);

  Common run_opts;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", run_config, "Scenario config file")->required()->check(CLI::ExistingFile);
  add_common(run, run_opts);

  Common suite_opts;
  std::string suite_name;
  auto* suite = app.add_subcommand("suite", "Run a canned experiment suite");
  suite->add_option("name", suite_name, "Suite name")
      ->required()
      ->check(CLI::IsMember(bvm::suite_names()));
  add_common(suite, suite_opts);

  std::string plots_dir;
  auto* plots = app.add_subcommand("plots", "Emit long-format plot data for a suite directory");
  plots->add_option("--out", plots_dir, "Suite results directory")->required();

  std::string check_config;
  std::vector<std::string> check_sets;
  auto* check = app.add_subcommand("validate-config", "Validate a config and print its normalized form");
  check->add_option("--config", check_config, "Scenario config file")->required();
  check->add_option("--set", check_sets, "Override a config key, key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      bvm::ScenarioConfig config = bvm::load_config(run_config);
      apply_sets(config, run_opts.sets);
      const std::string out = run_opts.out.empty() ? config.out_path : run_opts.out;
      const bvm::ScenarioResult r = bvm::run_scenario(config, out, run_opts.options());
      print_table(r.density ? "dp" : "posterior", r.table);
      if (r.density) {
        print_table("density", r.density->density);
        std::cout << "dp |bias| <= density |bias| in " << r.density->dp_not_worse_share << " of replications\n";
      }
      return 0;
    }
    if (*suite) {
      const std::string out = suite_opts.out.empty() ? "results/" + suite_name : suite_opts.out;
      const bvm::SuiteReport r = bvm::run_suite(suite_name, suite_opts.sets, out, suite_opts.options());
      std::cout << "completed " << r.completed << " cell(s) in " << out << '\n';
      for (const auto& [cell, message] : r.failures) std::cerr << "cell " << cell << " failed: " << message << '\n';
      return r.failures.empty() ? 0 : 1;
    }
    if (*plots) {
      const bvm::PlotsReport r = bvm::emit_plots_data(plots_dir);
      std::cout << "wrote " << r.rows << " rows to " << plots_dir << "/plots.csv\n";
      for (const auto& s : r.skipped) std::cerr << "skipped incomplete cell " << s << '\n';
      return 0;
    }
    if (*check) {
      bvm::ScenarioConfig config = bvm::load_config(check_config);
      apply_sets(config, check_sets);
      bvm::validate(config);
      std::cout << bvm::serialize(config);
      return 0;
    }
  } catch (const bvm::ConfigError& e) {
    std::cerr << "config error in '" << e.field() << "': " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
