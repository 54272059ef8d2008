#include <algorithm>
#include <cmath>
#include <string>

#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/model.hpp"

namespace bvm {
namespace {

constexpr double kProbFloor = 1e-12;

double clipped_log(double p) {
  return std::log(std::clamp(p, kProbFloor, 1.0 - kProbFloor));
}

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(what) + " = " + std::to_string(p) + " is outside (0,1)");
  }
}

// Integral of g against F. Discrete laws use their weights; densities use the
// midpoint rule on a grid of the requested level (the density is looked up by
// nearest cell).
double integrate(const Function& g, const CovariateLaw& F, const QuadratureOptions& quad) {
  if (const auto* discrete = std::get_if<DiscreteDistribution>(&F)) {
    std::vector<double> values(discrete->atoms.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = g(discrete->atoms[i]);
    return kernels::dot(values, discrete->weights);
  }
  const auto& density = std::get<GridFunction>(F);
  auto at_level = [&](int level) {
    const GridFunction w = GridFunction::sample(density.dim(), level,
                                                [&](const Point& z) { return density(z); });
    const GridFunction gv = GridFunction::sample(density.dim(), level, g);
    return kernels::dot(gv.values(), w.values()) / kernels::sum(w.values());
  };
  const int level = std::max(quad.level, 1);
  const double fine = at_level(level);
  if (quad.tolerance > 0.0) {
    const double coarse = at_level(level - 1);
    if (std::fabs(fine - coarse) > quad.tolerance) {
      throw QuadratureError("quadrature at level " + std::to_string(level) +
                            " does not resolve the integral to " + std::to_string(quad.tolerance));
    }
  }
  return fine;
}

}  // namespace

Dataset::Dataset(int dim, std::vector<Observation> obs) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("dataset dimension must be 1 or 2");
  obs_.reserve(obs.size());
  for (const auto& o : obs) push_back(o);
}

void Dataset::push_back(const Observation& o) {
  if (o.r > 1 || o.ry > 1 || o.ry > o.r) throw ArgumentError("observation requires ry <= r in {0,1}");
  for (int d = 0; d < dim_; ++d) {
    if (!(o.z[d] >= 0.0 && o.z[d] <= 1.0)) throw ArgumentError("covariate outside [0,1]^d");
  }
  obs_.push_back(o);
}

std::vector<Point> Dataset::covariates() const {
  std::vector<Point> z(obs_.size());
  for (std::size_t i = 0; i < obs_.size(); ++i) z[i] = obs_[i].z;
  return z;
}

std::size_t Dataset::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(obs_.begin(), obs_.end(), [](const Observation& o) { return o.r == 1; }));
}

double psi(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double psi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("psi_inv argument outside (0,1)");
  return std::log(p) - std::log1p(-p);
}

CovariateLaw uniform_law(int dim, int level) {
  return GridFunction::constant(dim, level, 1.0);
}

CovariateLaw empirical_law(const Dataset& data) {
  if (data.empty()) throw ArgumentError("empirical law of an empty dataset");
  DiscreteDistribution d;
  d.atoms = data.covariates();
  d.weights.assign(data.size(), 1.0 / static_cast<double>(data.size()));
  return d;
}

LogLikelihood log_likelihood(const Dataset& data, const ParamTriple& params, bool include_density) {
  const GridFunction* density = nullptr;
  if (include_density) {
    density = std::get_if<GridFunction>(&params.F);
    if (density == nullptr) throw ArgumentError("density likelihood requires a density for F");
  }
  std::vector<double> la;
  std::vector<double> lb;
  std::vector<double> lf;
  la.reserve(data.size());
  lb.reserve(data.size());
  for (const auto& o : data) {
    const double a = params.a(o.z);
    const double pi = 1.0 / a;
    require_probability(pi, "1/a(z)");
    la.push_back(o.r == 1 ? clipped_log(pi) : clipped_log(1.0 - pi));
    if (o.r == 1) {
      const double b = params.b(o.z);
      require_probability(b, "b(z)");
      lb.push_back(o.ry == 1 ? clipped_log(b) : clipped_log(1.0 - b));
    }
    if (density != nullptr) {
      const double f = (*density)(o.z);
      if (!(f > 0.0)) throw DomainError("density is not positive at an observed covariate");
      lf.push_back(std::log(f));
    }
  }
  LogLikelihood ll;
  ll.propensity = kernels::sum(la);
  ll.regression = kernels::sum(lb);
  ll.density = kernels::sum(lf);
  return ll;
}

double chi_functional(const Function& b, const CovariateLaw& F, const QuadratureOptions& quad) {
  return integrate(b, F, quad);
}

double efficient_influence(const Observation& obs, const ParamTriple& params, double chi) {
  const double b = params.b(obs.z);
  const double residual = obs.r == 1 ? params.a(obs.z) * (static_cast<double>(obs.ry) - b) : 0.0;
  return residual + b - chi;
}

EfficientSummary efficient_variance(const ParamTriple& truth, const QuadratureOptions& quad) {
  EfficientSummary s;
  s.chi = integrate(truth.b, truth.F, quad);
  s.var_b_part = integrate(
      [&](const Point& z) {
        const double b = truth.b(z);
        return truth.a(z) * b * (1.0 - b);
      },
      truth.F, quad);
  const double second = integrate(
      [&](const Point& z) {
        const double b = truth.b(z);
        return b * b;
      },
      truth.F, quad);
  s.var_f_part = std::max(0.0, second - s.chi * s.chi);
  s.var_eff = s.var_b_part + s.var_f_part;
  return s;
}

double aipw_estimate(const Dataset& data, const Function& a_hat, const Function& b_hat) {
  if (data.empty()) throw ArgumentError("AIPW estimate of an empty dataset");
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const auto& o : data) {
    const double b = b_hat(o.z);
    const double correction = o.r == 1 ? a_hat(o.z) * (static_cast<double>(o.ry) - b) : 0.0;
    terms.push_back(correction + b);
  }
  return kernels::sum(terms) / static_cast<double>(data.size());
}

double aipw_estimate(const Dataset& data, std::span<const double> a_hat, std::span<const double> b_hat) {
  if (data.empty()) throw ArgumentError("AIPW estimate of an empty dataset");
  if (a_hat.size() != data.size() || b_hat.size() != data.size()) {
    throw ArgumentError("AIPW estimate: fitted values do not match the data");
  }
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& o = data[i];
    const double correction = o.r == 1 ? a_hat[i] * (static_cast<double>(o.ry) - b_hat[i]) : 0.0;
    terms[i] = correction + b_hat[i];
  }
  return kernels::sum(terms) / static_cast<double>(data.size());
}

void check_margins(const ParamTriple& params, std::span<const Point> points, double margin) {
  for (const auto& z : points) {
    const double pi = 1.0 / params.a(z);
    const double b = params.b(z);
    if (!(pi > margin && pi < 1.0 - margin)) throw DomainError("propensity violates the margin");
    if (!(b > margin && b < 1.0 - margin)) throw DomainError("regression violates the margin");
  }
}

}  // namespace bvm
