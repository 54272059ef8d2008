#pragma once

// Pilot estimator of the inverse propensity a = 1 / P(R=1 | Z), fitted on a
// split of the data independent of the inference sample.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bvm/function_space.hpp"
#include "bvm/model.hpp"

namespace bvm {

class ModelTruth;

enum class PilotKind { kRegressogram, kSeriesLogistic };

std::string to_string(PilotKind kind);
PilotKind pilot_kind_from_string(const std::string& name);

struct PilotSpec {
  PilotKind kind = PilotKind::kRegressogram;
  int bins = 0;   // regressogram bins per axis; 0 = ceil(n_pilot^{1/(2+d)})
  int level = 3;  // series-logistic wavelet level
  double split_fraction = 0.5;
  double clip = 0.05;
  bool reuse = false;  // fit on the inference sample itself
};

struct DataSplit {
  Dataset pilot;
  Dataset inference;
  std::vector<std::size_t> pilot_index;
  std::vector<std::size_t> inference_index;
};

// Random partition with round(fraction * n) pilot observations; both index
// lists are sorted. ArgumentError if either part would be empty.
DataSplit split(const Dataset& data, double fraction, std::uint64_t seed);

// Fitted inverse propensity, bounded in [1/(1-clip), 1/clip].
class InversePropensity {
 public:
  InversePropensity() = default;

  double operator()(const Point& z) const;
  Function as_function() const;
  GridFunction to_grid(int level) const;

  PilotKind kind() const { return kind_; }
  int bins() const { return bins_; }

 private:
  friend InversePropensity fit_pilot(const Dataset&, const PilotSpec&);

  PilotKind kind_ = PilotKind::kRegressogram;
  int dim_ = 1;
  double clip_ = 0.05;
  int bins_ = 1;
  std::vector<double> cell_a_;  // regressogram
  int level_ = 0;               // series logistic
  std::vector<double> coef_;
};

int default_pilot_bins(std::size_t n_pilot, int dim);

// ArgumentError on an empty pilot set or invalid spec.
InversePropensity fit_pilot(const Dataset& pilot_set, const PilotSpec& spec);

struct PilotRateRow {
  std::size_t n = 0;
  double median_error = 0.0;  // L2(F0) distance of a_hat to a0
  std::vector<double> errors;
};

// For each n, fits `reps` pilots on fresh samples of size n from the truth.
std::vector<PilotRateRow> pilot_rate_probe(const ModelTruth& truth, const PilotSpec& spec,
                                           const std::vector<std::size_t>& n_list, int reps,
                                           std::uint64_t seed);

// L2(F0) distance between a fitted pilot and the truth's a0.
double pilot_l2_error(const InversePropensity& a_hat, const ModelTruth& truth);

}  // namespace bvm
