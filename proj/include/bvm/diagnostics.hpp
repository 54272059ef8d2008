#pragma once

// Bernstein-von Mises diagnostics: centering, distance of the scaled
// posterior to N(0, var_eff), credible intervals and coverage, and the
// Monte Carlo check of the Dirichlet posterior's Laplace transform.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bvm/function_space.hpp"
#include "bvm/model.hpp"
#include "bvm/sampler.hpp"
#include "bvm/scenario.hpp"

namespace bvm {

class ModelTruth;

// Oracle: chi0 + F_n[influence_0], needs the truth (ArgumentError if null).
// AIPW: aipw_estimate with the given fitted values at the data points.
double center(const Dataset& data, CenterKind kind, const ModelTruth* truth,
              std::span<const double> a_hat = {}, std::span<const double> b_hat = {});

double normal_cdf(double x);
double normal_quantile(double p);

// Hazen rule: linear interpolation with plotting positions (k - 1/2) / n.
double empirical_quantile(std::span<const double> sorted, double p);

struct NormalDistance {
  double ks = 0.0;
  double w1 = 0.0;
};

// KS and W1 (mean absolute quantile difference on p = k/1000, k = 1..999)
// between the draws and N(0, target_var). ArgumentError for fewer than 100
// draws, target_var <= 0 or draws with zero spread.
NormalDistance normal_distance(std::span<const double> scaled_draws, double target_var);

// Equal-tailed interval at (1 -+ level)/2. Needs at least 2/(1-level) draws.
std::pair<double, double> credible_interval(std::span<const double> draws, double level);

struct BvmReport {
  CenterKind center_kind = CenterKind::kOracle;
  double chi_hat = 0.0;
  double target_var = 0.0;
  double post_mean = 0.0;
  double post_sd = 0.0;
  std::vector<double> scaled_draws;  // sqrt(n) (chi - chi_hat)
  double ks_dist = 0.0;
  double w1_dist = 0.0;
  double ci_level = 0.95;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
};

BvmReport bvm_report(std::span<const double> chi_draws, std::size_t n, double chi_hat,
                     double target_var, double chi_true, double ci_level, CenterKind kind);

struct CoverageTable {
  std::size_t reps = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;  // binomial
  double mean_sd_ratio = 0.0;  // sqrt(n) post_sd / sqrt(var_eff)
  double median_ks = 0.0;
  double median_w1 = 0.0;
  std::vector<ResultRow> rows;
};

CoverageTable summarize(std::vector<ResultRow> rows);

// Runs the scenario's replications in memory (no files).
CoverageTable coverage_experiment(const ScenarioConfig& config, int jobs = 1);

struct LaplaceRow {
  double t = 0.0;
  double estimate = 0.0;  // E[exp(t sqrt(n) (F g - F_n g)) | Z]
  double analytic = 0.0;  // exp(t^2 Var_F0(g) / 2)
  double ratio = 0.0;
  double mc_se = 0.0;  // of the ratio
};

// One Z-sample of size n from the density f0 (stream `seed`), mc_reps
// Dirichlet/bootstrap draws shared across t.
std::vector<LaplaceRow> dp_laplace_check(const GridFunction& f0, const Function& g, std::size_t n,
                                         const std::vector<double>& t_list, std::size_t mc_reps,
                                         std::uint64_t seed, const DPConfig& dp = {});

struct DensityComparison {
  CoverageTable dp;       // Dirichlet-process F
  CoverageTable density;  // exponentiated-GP density prior on f
  double dp_mean_abs_bias = 0.0;
  double density_mean_abs_bias = 0.0;
  // share of replications with |bias_dp| <= |bias_density|
  double dp_not_worse_share = 0.0;
};

// Paired replications with the density pipeline switched on.
DensityComparison density_bias_experiment(const ScenarioConfig& config, int jobs = 1);

}  // namespace bvm
