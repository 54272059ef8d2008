#pragma once

// Scenario runs and canned suites, persisted as per-replication CSV plus a
// JSON aggregate.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvm/diagnostics.hpp"
#include "bvm/scenario.hpp"

namespace bvm {

struct RunOptions {
  int jobs = 0;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed;  // overrides master_seed
  std::optional<bool> pilot_reuse;
};

struct ScenarioResult {
  CoverageTable table;
  std::optional<DensityComparison> density;
  double runtime_ms = 0.0;
};

// Writes <dir>/results.csv (rows in replication order, flushed as soon as
// the prefix is complete), results_density.csv when the density pipeline is
// on, and summary.json. results.incomplete exists while the run is in
// progress and is left behind on failure.
ScenarioResult run_scenario(ScenarioConfig config, const std::filesystem::path& dir,
                            const RunOptions& options = {});

struct SuiteCell {
  std::string name;  // subdirectory
  double x = 0.0;
  double y = 0.0;
  std::string label;  // e.g. threshold flag or pipeline
  ScenarioConfig config;
};

std::vector<std::string> suite_names();

// Expands a suite into its cells; `overrides` are "key=value" applied to
// every cell after the suite's own settings.
std::vector<SuiteCell> expand_suite(const std::string& name, const std::vector<std::string>& overrides);

// Position of alpha/(2alpha+d) + beta/(2beta+d) relative to 1/2.
std::string smoothness_flag(double alpha, double beta, int d);

struct SuiteReport {
  std::vector<std::pair<std::string, std::string>> failures;  // cell, message
  std::size_t completed = 0;
};

// Runs every cell into <dir>/<cell>/ and writes <dir>/suite_summary.csv. A
// failing cell is reported and skipped. dp-laplace writes laplace.csv.
SuiteReport run_suite(const std::string& name, const std::vector<std::string>& overrides,
                      const std::filesystem::path& dir, const RunOptions& options = {});

struct PlotsReport {
  std::size_t rows = 0;
  std::vector<std::string> skipped;  // missing or incomplete cells
};

// Long-format x,y,metric,value rows from every completed cell under `dir`,
// written to <dir>/plots.csv.
PlotsReport emit_plots_data(const std::filesystem::path& dir);

}  // namespace bvm
