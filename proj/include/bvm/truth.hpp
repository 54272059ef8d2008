#pragma once

// Simulation truths (a0, b0, f0) with prescribed Hölder smoothness, and the
// data-generating process built on them.

#include <cstdint>

#include "bvm/function_space.hpp"
#include "bvm/model.hpp"
#include "bvm/rng.hpp"

namespace bvm {

struct TruthSpec {
  int dim = 1;
  double alpha = 2.0;  // smoothness of the propensity
  double beta = 2.0;   // smoothness of the regression
  double gamma = 1.0;  // smoothness of the covariate density (if synthesized)
  std::uint64_t seed_a = 11;
  std::uint64_t seed_b = 12;
  std::uint64_t seed_f = 13;
  double amp_a = 1.0;
  double amp_b = 1.0;
  double amp_f = 1.0;
  double offset_a = 0.5;  // logit level of the propensity
  double offset_b = 0.0;  // logit level of the regression
  double margin = 0.05;
  bool synthesized_density = false;  // false: F0 uniform
  // Use the regression's wavelet multipliers for a0 and f0 as well, so the
  // fine-scale structure of the three functions is aligned.
  bool shared_multipliers = false;
  double density_log_bound = 1.5;  // |log f0| <= 2 * bound before normalizing
  int max_level = 10;
  int grid_level = 12;
  WaveletFamily family = WaveletFamily::kHaar;
};

class ModelTruth {
 public:
  explicit ModelTruth(const TruthSpec& spec);

  const TruthSpec& spec() const { return spec_; }
  const GridFunction& propensity() const { return propensity_; }  // 1 / a0
  const GridFunction& regression() const { return regression_; }  // b0
  const GridFunction& density() const { return density_; }        // f0

  double a(const Point& z) const { return 1.0 / propensity_(z); }
  double b(const Point& z) const { return regression_(z); }

  ParamTriple params() const;
  const EfficientSummary& summary() const { return summary_; }
  double chi() const { return summary_.chi; }

  Point draw_covariate(Rng& rng) const;
  Observation draw(Rng& rng) const;
  Dataset simulate(std::size_t n, Rng& rng) const;

  // chi0 + mean of the efficient influence function over the data.
  double oracle_center(const Dataset& data) const;

 private:
  TruthSpec spec_;
  GridFunction propensity_;
  GridFunction regression_;
  GridFunction density_;
  std::vector<double> cumulative_;  // density cell CDF, empty when uniform
  EfficientSummary summary_;
};

}  // namespace bvm
