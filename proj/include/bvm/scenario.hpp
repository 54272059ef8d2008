#pragma once

// Scenario configuration: a flat "dotted.key = value" text file. Lines
// starting with '#' and blank lines are ignored; serialize() writes every key
// in a fixed order, so serialize(parse(text)) is the normalized file.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bvm/pilot.hpp"
#include "bvm/priors.hpp"
#include "bvm/sampler.hpp"
#include "bvm/truth.hpp"

namespace bvm {

enum class CenterKind { kOracle, kAipw };
// exact-normal replaces the posterior by N(chi_hat, var_eff / n) draws.
enum class PosteriorMode { kMcmc, kExactNormal };

std::string to_string(CenterKind kind);
std::string to_string(PosteriorMode mode);

struct PriorConfig {
  PriorKind kind = PriorKind::kSeries;
  double betabar = 2.0;
  double r = 0.0;
  double sigma_lambda = 1.0;
  int grid_level = 12;  // Riemann-Liouville discretization
  WaveletFamily family = WaveletFamily::kHaar;
};

// Optional second pipeline: exponentiated series prior on the covariate
// density instead of the Dirichlet process.
struct DensityPriorConfig {
  bool enabled = false;
  double gammabar = 3.0;
  double r = 0.0;
};

struct ScenarioConfig {
  std::size_t n = 1000;
  int d = 1;
  int reps = 200;
  std::uint64_t master_seed = 1;
  CenterKind center_kind = CenterKind::kOracle;
  double ci_level = 0.95;
  std::string out_path = "results";
  PosteriorMode posterior = PosteriorMode::kMcmc;
  TruthSpec truth;
  PriorConfig prior;
  PilotSpec pilot;
  DPConfig dp;
  SamplerConfig sampler;  // sampler.seed is derived per replication
  DensityPriorConfig density_prior;

  bool operator==(const ScenarioConfig&) const;
};

// ConfigError naming the key for unknown keys, malformed values and failed
// validation.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_string(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize(const ScenarioConfig& config);
// Applies one "key=value" override.
void set_config_value(ScenarioConfig& config, const std::string& key, const std::string& value);
void validate(const ScenarioConfig& config);
std::vector<std::string> config_keys();

// The truth spec with the scenario dimension applied.
TruthSpec truth_spec(const ScenarioConfig& config);

struct ResultRow {
  int rep_id = 0;
  std::uint64_t seed = 0;
  double chi_true = 0.0;
  double chi_hat = 0.0;
  double post_mean = 0.0;
  double post_sd = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
  double ks_dist = 0.0;
  double w1_dist = 0.0;
  double runtime_ms = 0.0;  // JSON metadata only, never in the CSV
  double sd_ratio = 0.0;    // sqrt(n) post_sd / sqrt(var_eff)
};

std::string result_csv_header();
std::string result_csv_line(const ResultRow& row);

// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace bvm
