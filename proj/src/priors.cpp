#include <algorithm>
#include <cmath>

#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/priors.hpp"

namespace bvm {

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::kSeries: return "series";
    case PriorKind::kRiemannLiouville: return "riemann-liouville";
    case PriorKind::kPropensityDependent: return "propensity-dependent";
    case PriorKind::kExpDensity: return "exp-density";
  }
  return "series";
}

PriorKind prior_kind_from_string(const std::string& name) {
  if (name == "series") return PriorKind::kSeries;
  if (name == "riemann-liouville") return PriorKind::kRiemannLiouville;
  if (name == "propensity-dependent") return PriorKind::kPropensityDependent;
  if (name == "exp-density") return PriorKind::kExpDensity;
  throw ArgumentError("unknown prior kind '" + name + "'");
}

void SeedMap::check_seed(std::span<const double> theta) const {
  if (theta.size() != seed_dim()) {
    throw ArgumentError("seed has length " + std::to_string(theta.size()) + ", expected " +
                        std::to_string(seed_dim()));
  }
}

std::vector<double> SeedMap::eval(std::span<const double> theta, std::span<const Point> points) const {
  check_seed(theta);
  const std::vector<double> d = design(points);
  std::vector<double> out(points.size());
  kernels::gemv(d, points.size(), seed_dim(), theta, out);
  return out;
}

int series_truncation(double betabar, std::size_t n, int dim) {
  if (!(betabar > 0.0)) throw ArgumentError("betabar must be positive");
  if (n == 0) throw ArgumentError("series truncation needs n >= 1");
  const double target = std::pow(static_cast<double>(n), 1.0 / (2.0 * betabar + dim));
  int j = 0;
  while (std::ldexp(1.0, j) < target * (1.0 - 1e-12)) ++j;
  return j;
}

double series_sigma(int level, double r, int dim) {
  if (level < 0) return 1.0;
  return std::exp2(-level * (r + 0.5 * dim));
}

SeriesPrior::SeriesPrior(const SeriesPriorSpec& spec)
    : spec_(spec), basis_(spec.family, spec.dim, series_truncation(spec.betabar, spec.n, spec.dim)) {
  if (spec.r < 0.0) throw ArgumentError("series prior scaling exponent r must be >= 0");
  sigmas_.resize(basis_.size());
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    sigmas_[i] = series_sigma(basis_.index(i).level, spec.r, spec.dim);
  }
}

std::vector<double> SeriesPrior::design(std::span<const Point> points) const {
  std::vector<double> d = basis_.design(points);
  const std::size_t p = sigmas_.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t c = 0; c < p; ++c) d[i * p + c] *= sigmas_[c];
  }
  return d;
}

double SeriesPrior::covariance(const Point& z, const Point& w) const {
  const std::array<Point, 2> pts{z, w};
  const std::vector<double> d = design(pts);
  const std::size_t p = sigmas_.size();
  return kernels::dot(std::span(d).first(p), std::span(d).subspan(p, p));
}

double rkhs_norm_series(const SeriesPriorSpec& spec, std::span<const double> coeffs) {
  const int truncation = series_truncation(spec.betabar, spec.n, spec.dim);
  int level = -1;
  std::size_t size = 1;
  while (size < coeffs.size()) {
    ++level;
    size = WaveletBasis(spec.family, spec.dim, level).size();
  }
  if (size != coeffs.size()) throw ArgumentError("coefficient vector is not a full basis layout");
  const WaveletBasis basis(spec.family, spec.dim, std::max(level, 0));
  double sq = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    const int j = basis.index(i).level;
    if (j > truncation) {
      throw ArgumentError("function has a coefficient at level " + std::to_string(j) +
                          " above the prior truncation " + std::to_string(truncation));
    }
    const double s = series_sigma(j, spec.r, spec.dim);
    sq += coeffs[i] * coeffs[i] / (s * s);
  }
  return std::sqrt(sq);
}

RiemannLiouvillePrior::RiemannLiouvillePrior(const RLPriorSpec& spec) : spec_(spec) {
  if (!(spec.betabar > 0.0)) throw ArgumentError("betabar must be positive");
  if (spec.grid_level < 1 || spec.grid_level > 20) throw ArgumentError("RL grid level out of range");
}

std::size_t RiemannLiouvillePrior::poly_terms() const {
  return static_cast<std::size_t>(std::floor(spec_.betabar)) + 2;
}

void RiemannLiouvillePrior::integral_row(double z, std::span<double> row) const {
  if (row.size() != cells()) throw ArgumentError("RL integral row has the wrong length");
  std::fill(row.begin(), row.end(), 0.0);
  if (!(z > 0.0)) return;
  const double ds = 1.0 / static_cast<double>(cells());
  const double sqrt_ds = std::sqrt(ds);
  const double e = spec_.betabar - 0.5;
  // cells [s_i, s_i + ds) with s_i < z; the one containing z (from the left)
  // is integrated exactly.
  const std::size_t last = std::min(cells() - 1, static_cast<std::size_t>(std::ceil(z / ds)) - 1);
  for (std::size_t i = 0; i < last; ++i) {
    const double s = static_cast<double>(i) * ds;
    row[i] = std::pow(z - s, e) * sqrt_ds;
  }
  const double s_last = static_cast<double>(last) * ds;
  const double avg = std::pow(z - s_last, spec_.betabar + 0.5) / ((spec_.betabar + 0.5) * ds);
  row[last] = avg * sqrt_ds;
}

std::vector<double> RiemannLiouvillePrior::design(std::span<const Point> points) const {
  const std::size_t p = seed_dim();
  const std::size_t q = poly_terms();
  std::vector<double> d(points.size() * p, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double z = points[i][0];
    if (!(z >= 0.0 && z <= 1.0)) throw ArgumentError("RL prior evaluated outside [0,1]");
    double power = 1.0;
    for (std::size_t k = 0; k < q; ++k) {
      d[i * p + k] = power;
      power *= z;
    }
    integral_row(z, std::span(d).subspan(i * p + q, cells()));
  }
  return d;
}

PropensityDependentPrior::PropensityDependentPrior(std::shared_ptr<const SeedMap> inner, Function a_hat,
                                                   double sigma)
    : inner_(std::move(inner)), a_hat_(std::move(a_hat)), sigma_(sigma) {
  if (!inner_ || !inner_->linear()) throw ArgumentError("propensity-dependent prior needs a linear inner map");
  if (!(sigma >= 0.0)) throw ArgumentError("sigma_lambda must be >= 0");
}

std::vector<double> PropensityDependentPrior::design(std::span<const Point> points) const {
  const std::size_t k = inner_->seed_dim();
  const std::vector<double> inner = inner_->design(points);
  std::vector<double> d(points.size() * (k + 1));
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::copy_n(inner.begin() + static_cast<std::ptrdiff_t>(i * k), k,
                d.begin() + static_cast<std::ptrdiff_t>(i * (k + 1)));
    d[i * (k + 1) + k] = sigma_ * a_hat_(points[i]);
  }
  return d;
}

ExpDensityMap::ExpDensityMap(std::shared_ptr<const SeedMap> inner, int grid_level)
    : inner_(std::move(inner)), grid_level_(grid_level) {
  if (!inner_ || !inner_->linear()) throw ArgumentError("exp-density map needs a linear inner map");
  const GridFunction grid = GridFunction::constant(inner_->dim(), grid_level, 0.0);
  std::vector<Point> centers(grid.size());
  for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = grid.cell_center(i);
  grid_design_ = inner_->design(centers);
}

std::vector<double> ExpDensityMap::design(std::span<const Point>) const {
  throw ArgumentError("the exp-density map is not linear in its seed");
}

GridFunction ExpDensityMap::density_from_log(std::vector<double> w) const {
  const double top = *std::max_element(w.begin(), w.end());
  for (double& v : w) v = std::exp(v - top);
  GridFunction f(inner_->dim(), grid_level_, std::move(w));
  const double mass = quadrature(f);
  for (double& v : f.mutable_values()) v /= mass;
  return f;
}

GridFunction ExpDensityMap::density(std::span<const double> theta) const {
  check_seed(theta);
  const std::size_t cells = grid_design_.size() / seed_dim();
  std::vector<double> w(cells);
  kernels::gemv(grid_design_, cells, seed_dim(), theta, w);
  return density_from_log(std::move(w));
}

std::vector<double> ExpDensityMap::eval(std::span<const double> theta, std::span<const Point> points) const {
  const GridFunction f = density(theta);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
  return out;
}

}  // namespace bvm
