#pragma once

// Gaussian priors on eta^b (and eta^f), each written as a deterministic map
// from a standard-normal seed vector theta to a function. The linear maps
// expose their design matrix so the sampler can work on eta directly.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bvm/function_space.hpp"

namespace bvm {

enum class PriorKind { kSeries, kRiemannLiouville, kPropensityDependent, kExpDensity };

std::string to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& name);

class SeedMap {
 public:
  virtual ~SeedMap() = default;

  virtual PriorKind kind() const = 0;
  virtual int dim() const = 0;
  virtual std::size_t seed_dim() const = 0;
  virtual bool linear() const { return true; }

  // Row-major points x seed_dim() matrix D with eval(theta, z_i) = (D theta)_i.
  // ArgumentError for nonlinear maps.
  virtual std::vector<double> design(std::span<const Point> points) const = 0;

  // ArgumentError if theta.size() != seed_dim().
  virtual std::vector<double> eval(std::span<const double> theta,
                                   std::span<const Point> points) const;

 protected:
  void check_seed(std::span<const double> theta) const;
};

struct SeriesPriorSpec {
  double betabar = 2.0;
  double r = 0.0;
  std::size_t n = 1000;
  int dim = 1;
  WaveletFamily family = WaveletFamily::kHaar;
};

// Smallest J >= 0 with 2^J >= n^{1/(2 betabar + d)}.
int series_truncation(double betabar, std::size_t n, int dim);
// 2^{-j(r + d/2)}; the scaling term (j = -1) has sigma = 1.
double series_sigma(int level, double r, int dim);

class SeriesPrior final : public SeedMap {
 public:
  explicit SeriesPrior(const SeriesPriorSpec& spec);

  PriorKind kind() const override { return PriorKind::kSeries; }
  int dim() const override { return spec_.dim; }
  std::size_t seed_dim() const override { return basis_.size(); }
  std::vector<double> design(std::span<const Point> points) const override;

  const SeriesPriorSpec& spec() const { return spec_; }
  int truncation() const { return basis_.max_level(); }
  const WaveletBasis& basis() const { return basis_; }
  // Standard deviation of each coefficient, in flat basis order.
  const std::vector<double>& sigmas() const { return sigmas_; }

  // Prior covariance K_W(z, z') = sum sigma^2 psi(z) psi(z').
  double covariance(const Point& z, const Point& w) const;

 private:
  SeriesPriorSpec spec_;
  WaveletBasis basis_;
  std::vector<double> sigmas_;
};

// Norm of sum_i w_i psi_i in the RKHS of the series prior. `coeffs` is a full
// flat coefficient vector of some basis level; ArgumentError if any
// coefficient above the truncation level is nonzero.
double rkhs_norm_series(const SeriesPriorSpec& spec, std::span<const double> coeffs);

struct RLPriorSpec {
  double betabar = 1.0;
  int grid_level = 12;
};

// sum_{k <= floor(betabar)+1} g_k z^k + int_0^z (z - s)^{betabar - 1/2} dB_s,
// the integral discretized by a left-point Riemann sum with increments
// theta_i sqrt(ds). The cell ending at z uses the cell average of the kernel.
// Seeds: polynomial coefficients first, then the increments.
class RiemannLiouvillePrior final : public SeedMap {
 public:
  explicit RiemannLiouvillePrior(const RLPriorSpec& spec);

  PriorKind kind() const override { return PriorKind::kRiemannLiouville; }
  int dim() const override { return 1; }
  std::size_t seed_dim() const override { return poly_terms() + cells(); }
  std::vector<double> design(std::span<const Point> points) const override;

  std::size_t poly_terms() const;
  std::size_t cells() const { return std::size_t{1} << spec_.grid_level; }
  const RLPriorSpec& spec() const { return spec_; }

  // Only the fractional integral, with the polynomial seeds ignored.
  void integral_row(double z, std::span<double> row) const;

 private:
  RLPriorSpec spec_;
};

// eta(z) = inner(theta_1..k)(z) + sigma * theta_{k+1} * a_hat(z).
class PropensityDependentPrior final : public SeedMap {
 public:
  PropensityDependentPrior(std::shared_ptr<const SeedMap> inner, Function a_hat, double sigma);

  PriorKind kind() const override { return PriorKind::kPropensityDependent; }
  int dim() const override { return inner_->dim(); }
  std::size_t seed_dim() const override { return inner_->seed_dim() + 1; }
  std::vector<double> design(std::span<const Point> points) const override;

  const SeedMap& inner() const { return *inner_; }
  double sigma() const { return sigma_; }
  double a_hat(const Point& z) const { return a_hat_(z); }

 private:
  std::shared_ptr<const SeedMap> inner_;
  Function a_hat_;
  double sigma_;
};

// f = exp(W) / int exp(W) on a grid, W the inner (linear) map at the cell
// centres.
class ExpDensityMap final : public SeedMap {
 public:
  ExpDensityMap(std::shared_ptr<const SeedMap> inner, int grid_level);

  PriorKind kind() const override { return PriorKind::kExpDensity; }
  int dim() const override { return inner_->dim(); }
  std::size_t seed_dim() const override { return inner_->seed_dim(); }
  bool linear() const override { return false; }
  std::vector<double> design(std::span<const Point> points) const override;
  // Density values at the points (nearest grid cell).
  std::vector<double> eval(std::span<const double> theta,
                           std::span<const Point> points) const override;

  GridFunction density(std::span<const double> theta) const;
  // Density from W already evaluated at the cell centres.
  GridFunction density_from_log(std::vector<double> w) const;
  // Design of the inner map at the cell centres (cells x seed_dim).
  const std::vector<double>& grid_design() const { return grid_design_; }
  int grid_level() const { return grid_level_; }
  const SeedMap& inner() const { return *inner_; }

 private:
  std::shared_ptr<const SeedMap> inner_;
  int grid_level_;
  std::vector<double> grid_design_;
};

}  // namespace bvm
