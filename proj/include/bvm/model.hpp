#pragma once

// The missing-at-random binary outcome model. An observation is (Z, R, RY);
// the law is described by the inverse propensity a(z) = 1 / P(R=1 | Z=z),
// the regression b(z) = P(Y=1 | Z=z) and the covariate law F.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "bvm/function_space.hpp"

namespace bvm {

struct Observation {
  Point z{0.0, 0.0};
  std::uint8_t r = 0;
  std::uint8_t ry = 0;  // R * Y, so ry == 0 whenever r == 0
};

class Dataset {
 public:
  explicit Dataset(int dim = 1) : dim_(dim) {}
  Dataset(int dim, std::vector<Observation> obs);

  int dim() const { return dim_; }
  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  std::span<const Observation> observations() const { return obs_; }

  // Validates ry <= r and z in [0,1]^d; throws ArgumentError.
  void push_back(const Observation& o);

  std::vector<Point> covariates() const;
  std::size_t observed_count() const;

  auto begin() const { return obs_.begin(); }
  auto end() const { return obs_.end(); }

 private:
  int dim_;
  std::vector<Observation> obs_;
};

// Logistic link and its inverse.
double psi(double x);
double psi_inv(double p);

// A discrete distribution: atoms with weights summing to one. Empirical
// distributions and Dirichlet-process draws are of this form.
struct DiscreteDistribution {
  std::vector<Point> atoms;
  std::vector<double> weights;
};

// Covariate law: a density on a grid, or a discrete distribution.
using CovariateLaw = std::variant<GridFunction, DiscreteDistribution>;

CovariateLaw uniform_law(int dim, int level);
CovariateLaw empirical_law(const Dataset& data);

struct ParamTriple {
  Function a;  // inverse propensity, values in (1, inf)
  Function b;  // regression, values in (0, 1)
  CovariateLaw F;
};

struct QuadratureOptions {
  int level = 14;
  // When positive, the integral is also computed one level coarser and a
  // QuadratureError is raised if the two differ by more than this.
  double tolerance = 0.0;
};

// Likelihood components; `density` is zero unless requested.
struct LogLikelihood {
  double propensity = 0.0;  // l^a
  double regression = 0.0;  // l^b
  double density = 0.0;     // l^f
  double total() const { return propensity + regression + density; }
};

// Probabilities are clipped to [1e-12, 1 - 1e-12] before logs; values
// outside (0,1) raise DomainError. Including the density requires F to be a
// GridFunction density.
LogLikelihood log_likelihood(const Dataset& data, const ParamTriple& params,
                             bool include_density);

// int b dF.
double chi_functional(const Function& b, const CovariateLaw& F,
                      const QuadratureOptions& quad = {});

// r a(z) (y - b(z)) + b(z) - chi
double efficient_influence(const Observation& obs, const ParamTriple& params, double chi);

struct EfficientSummary {
  double chi = 0.0;
  double var_b_part = 0.0;  // int a b (1 - b) dF
  double var_f_part = 0.0;  // int b^2 dF - chi^2
  double var_eff = 0.0;     // sum of the two
};

EfficientSummary efficient_variance(const ParamTriple& truth, const QuadratureOptions& quad = {});

// (1/n) sum r a_hat(z) (y - b_hat(z)) + b_hat(z)
double aipw_estimate(const Dataset& data, const Function& a_hat, const Function& b_hat);
// Same, with a_hat and b_hat already evaluated at the data points.
double aipw_estimate(const Dataset& data, std::span<const double> a_hat, std::span<const double> b_hat);

// Checks 1/a and b against (margin, 1 - margin) at the given points.
void check_margins(const ParamTriple& params, std::span<const Point> points, double margin);

}  // namespace bvm
