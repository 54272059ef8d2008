#include <algorithm>
#include <cmath>

#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/truth.hpp"

namespace bvm {
namespace {

GridFunction synthesize(const TruthSpec& spec, double smoothness, std::uint64_t seed, double amp) {
  HolderSynthesisSpec h;
  h.smoothness = smoothness;
  h.seed = spec.shared_multipliers ? spec.seed_b : seed;
  h.amplitude = amp;
  h.family = spec.family;
  h.dim = spec.dim;
  h.max_level = spec.max_level;
  h.grid_level = spec.grid_level;
  return synthesize_holder(h);
}

GridFunction squash_probability(GridFunction g, double offset, double margin) {
  for (double& v : g.mutable_values()) v = margin + (1.0 - 2.0 * margin) * psi(offset + v);
  return g;
}

}  // namespace

ModelTruth::ModelTruth(const TruthSpec& spec) : spec_(spec) {
  if (!(spec.alpha > 0 && spec.beta > 0 && spec.gamma > 0)) {
    throw ArgumentError("truth smoothness parameters must be positive");
  }
  if (!(spec.margin > 0.0 && spec.margin < 0.5)) throw ArgumentError("truth margin must be in (0, 1/2)");
  if (spec.grid_level <= spec.max_level) throw ArgumentError("truth grid level must exceed max_level");

  propensity_ = squash_probability(synthesize(spec, spec.alpha, spec.seed_a, spec.amp_a),
                                   spec.offset_a, spec.margin);
  regression_ = squash_probability(synthesize(spec, spec.beta, spec.seed_b, spec.amp_b),
                                   spec.offset_b, spec.margin);
  if (spec.synthesized_density) {
    GridFunction eta = synthesize(spec, spec.gamma, spec.seed_f, spec.amp_f);
    const double bound = spec.density_log_bound;
    for (double& v : eta.mutable_values()) v = std::exp(bound * std::tanh(v / bound));
    const double mass = quadrature(eta);
    for (double& v : eta.mutable_values()) v /= mass;
    density_ = std::move(eta);
    cumulative_.resize(density_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < density_.size(); ++i) {
      acc += density_[i] * density_.cell_volume();
      cumulative_[i] = acc;
    }
    for (double& c : cumulative_) c /= acc;
  } else {
    density_ = GridFunction::constant(spec.dim, spec.grid_level, 1.0);
  }
  QuadratureOptions quad;
  quad.level = spec.grid_level;
  summary_ = efficient_variance(params(), quad);
}

ParamTriple ModelTruth::params() const {
  ParamTriple p;
  p.a = [pi = propensity_](const Point& z) { return 1.0 / pi(z); };
  p.b = regression_.as_function();
  p.F = density_;
  return p;
}

Point ModelTruth::draw_covariate(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (cumulative_.empty()) {
    Point z{0.0, 0.0};
    for (int d = 0; d < spec_.dim; ++d) z[d] = unif(rng);
    return z;
  }
  const double u = unif(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                 cumulative_.size() - 1);
  const Point center = density_.cell_center(cell);
  const double h = 1.0 / static_cast<double>(density_.cells_per_axis());
  Point z{0.0, 0.0};
  for (int d = 0; d < spec_.dim; ++d) z[d] = center[d] + (unif(rng) - 0.5) * h;
  return z;
}

Observation ModelTruth::draw(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Observation o;
  o.z = draw_covariate(rng);
  const double ur = unif(rng);
  const double uy = unif(rng);
  o.r = ur < propensity_(o.z) ? 1 : 0;
  o.ry = (o.r == 1 && uy < regression_(o.z)) ? 1 : 0;
  return o;
}

Dataset ModelTruth::simulate(std::size_t n, Rng& rng) const {
  std::vector<Observation> obs(n);
  for (auto& o : obs) o = draw(rng);
  return Dataset(spec_.dim, std::move(obs));
}

double ModelTruth::oracle_center(const Dataset& data) const {
  if (data.empty()) throw ArgumentError("oracle center of an empty dataset");
  const ParamTriple p = params();
  std::vector<double> infl(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) infl[i] = efficient_influence(data[i], p, chi());
  return chi() + kernels::sum(infl) / static_cast<double>(data.size());
}

}  // namespace bvm
