#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/sampler.hpp"

namespace bvm {
namespace {

void fill_normal(std::span<double> x, Rng& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  for (double& v : x) v = norm(rng);
}

double checked(double ll) {
  if (!std::isfinite(ll)) throw DomainError("non-finite log-likelihood in the slice sampler");
  return ll;
}

}  // namespace

void validate(const SamplerConfig& c) {
  if (c.burnin < 0) throw ArgumentError("sampler burnin must be >= 0");
  if (c.draws < 1) throw ArgumentError("sampler draws must be >= 1");
  if (c.thin < 1) throw ArgumentError("sampler thin must be >= 1");
  if (c.chains < 1) throw ArgumentError("sampler chains must be >= 1");
}

CompressedDesign compress_design(const SeedMap& map, std::span<const Point> points,
                                 std::span<const double> successes, std::span<const double> trials) {
  if (successes.size() != points.size() || trials.size() != points.size()) {
    throw ArgumentError("design counts do not match the points");
  }
  const std::size_t p = map.seed_dim();
  const std::vector<double> full = map.design(points);
  auto row = [&](std::size_t i) { return std::span(full).subspan(i * p, p); };

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto a = row(x);
    const auto b = row(y);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });

  CompressedDesign c;
  c.cols = p;
  c.row_of.assign(points.size(), 0);
  // Rows are numbered by first appearance so the layout does not depend on
  // the sort.
  std::vector<std::size_t> group(points.size());
  std::vector<std::size_t> representative;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool same = k > 0 && std::ranges::equal(row(order[k]), row(order[k - 1]));
    if (!same) representative.push_back(order[k]);
    group[order[k]] = representative.size() - 1;
  }
  std::vector<std::size_t> number(representative.size(), SIZE_MAX);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t& id = number[group[i]];
    if (id == SIZE_MAX) {
      id = c.rows++;
      const auto r = row(i);
      c.matrix.insert(c.matrix.end(), r.begin(), r.end());
      c.successes.push_back(0.0);
      c.trials.push_back(0.0);
    }
    c.row_of[i] = id;
    c.successes[id] += successes[i];
    c.trials[id] += trials[i];
  }
  return c;
}

SeedChains elliptical_slice(std::span<const double> design, std::size_t rows, std::size_t cols,
                            const EtaLogLik& loglik, const SamplerConfig& config, bool keep_theta) {
  validate(config);
  if (design.size() != rows * cols) throw ArgumentError("design size does not match rows x cols");
  SeedChains out;
  out.seed_dim = cols;
  out.eta_dim = rows;
  const auto total = static_cast<std::size_t>(config.draws) * static_cast<std::size_t>(config.chains);
  out.eta.reserve(total * rows);
  if (keep_theta) out.theta.reserve(total * cols);
  out.chain_of.reserve(total);

  std::vector<double> theta(cols), nu(cols), theta_new(cols);
  std::vector<double> eta(rows), eta_nu(rows), eta_new(rows);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  for (int chain = 0; chain < config.chains; ++chain) {
    Rng rng = make_rng(config.seed, {stream_id(Stream::kChain), static_cast<std::uint64_t>(chain)});
    fill_normal(theta, rng);
    kernels::gemv(design, rows, cols, theta, eta);
    double ll = checked(loglik(eta));
    std::size_t evals = 0;
    const int steps = config.burnin + config.draws * config.thin;
    for (int step = 0; step < steps; ++step) {
      fill_normal(nu, rng);
      kernels::gemv(design, rows, cols, nu, eta_nu);
      const double threshold = ll + std::log(unif(rng));
      double phi = unif(rng) * kTwoPi;
      double lo = phi - kTwoPi;
      double hi = phi;
      while (true) {
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        kernels::rotate(eta, eta_nu, c, s, eta_new);
        const double ll_new = checked(loglik(eta_new));
        ++evals;
        if (ll_new > threshold) {
          kernels::rotate(theta, nu, c, s, theta_new);
          theta.swap(theta_new);
          eta.swap(eta_new);
          ll = ll_new;
          break;
        }
        if (phi < 0.0) {
          lo = phi;
        } else {
          hi = phi;
        }
        phi = lo + unif(rng) * (hi - lo);
      }
      if (step >= config.burnin && (step - config.burnin + 1) % config.thin == 0) {
        out.eta.insert(out.eta.end(), eta.begin(), eta.end());
        if (keep_theta) out.theta.insert(out.theta.end(), theta.begin(), theta.end());
        out.chain_of.push_back(chain);
      }
    }
    out.stats.push_back({static_cast<double>(evals) / static_cast<double>(steps)});
  }
  return out;
}

BPosterior sample_b_posterior(const Dataset& data, const SeedMap& map, const SamplerConfig& config,
                              std::span<const Point> extra) {
  if (!map.linear()) throw ArgumentError("the b-sampler needs a linear seed map");
  if (data.dim() != map.dim()) throw ArgumentError("data and prior dimensions differ");
  std::vector<Point> points = data.covariates();
  points.insert(points.end(), extra.begin(), extra.end());
  std::vector<double> succ(points.size(), 0.0);
  std::vector<double> trials(points.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    succ[i] = data[i].ry;
    trials[i] = data[i].r;
  }
  BPosterior post;
  post.n_data = data.size();
  post.design = compress_design(map, points, succ, trials);
  const CompressedDesign& c = post.design;
  const EtaLogLik ll = [&c](std::span<const double> eta) {
    return kernels::binomial_loglik(eta, c.successes, c.trials);
  };
  post.chains = elliptical_slice(c.matrix, c.rows, c.cols, ll, config);
  return post;
}

// Unassigned stick mass below this goes to the current atom.
constexpr double kStickTail = 1e-15;

FDraw draw_F_weights(std::size_t n, int dim, const DPConfig& dp, Rng& rng) {
  if (n == 0) throw ArgumentError("F draw needs at least one observation");
  if (dp.base_mass < 0.0) throw ArgumentError("DP base mass must be >= 0");
  FDraw f;
  f.obs_weights.resize(n);
  std::exponential_distribution<double> expo(1.0);
  for (double& w : f.obs_weights) w = expo(rng);
  double w0 = 0.0;
  if (dp.base_mass > 0.0) {
    if (dp.stick_truncation < 1) throw ArgumentError("stick truncation must be >= 1");
    w0 = std::gamma_distribution<double>(dp.base_mass, 1.0)(rng);
  }
  const double total = kernels::sum(f.obs_weights) + w0;
  for (double& w : f.obs_weights) w /= total;
  if (dp.base_mass > 0.0) {
    const double base_total = w0 / total;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double remaining = 1.0;
    for (int k = 0; k < dp.stick_truncation; ++k) {
      Point atom{0.0, 0.0};
      for (int d = 0; d < dim; ++d) atom[d] = unif(rng);
      double piece = remaining;
      if (k + 1 < dp.stick_truncation && remaining > kStickTail) {
        // Beta(1, M) by inversion
        piece = remaining * (1.0 - std::pow(1.0 - unif(rng), 1.0 / dp.base_mass));
      }
      remaining -= piece;
      f.base_atoms.push_back(atom);
      f.base_weights.push_back(base_total * piece);
      if (remaining <= 0.0) break;
    }
  }
  return f;
}

DiscreteDistribution draw_F(std::span<const Point> z_obs, int dim, const DPConfig& dp, Rng& rng) {
  FDraw f = draw_F_weights(z_obs.size(), dim, dp, rng);
  DiscreteDistribution out;
  out.atoms.assign(z_obs.begin(), z_obs.end());
  out.weights = std::move(f.obs_weights);
  out.atoms.insert(out.atoms.end(), f.base_atoms.begin(), f.base_atoms.end());
  out.weights.insert(out.weights.end(), f.base_weights.begin(), f.base_weights.end());
  return out;
}

double PosteriorDraws::mean() const {
  if (chi.empty()) throw ArgumentError("no posterior draws");
  return kernels::sum(chi) / static_cast<double>(chi.size());
}

double PosteriorDraws::sd() const {
  if (chi.size() < 2) throw ArgumentError("posterior sd needs two draws");
  const double m = mean();
  std::vector<double> sq(chi.size());
  for (std::size_t i = 0; i < chi.size(); ++i) sq[i] = (chi[i] - m) * (chi[i] - m);
  return std::sqrt(kernels::sum(sq) / static_cast<double>(chi.size() - 1));
}

void PosteriorDraws::write_csv(std::ostream& out) const {
  const bool with_lambda = !lambda.empty();
  out << "chi" << (with_lambda ? ",lambda" : "") << ",chain\n";
  out.precision(17);
  for (std::size_t s = 0; s < chi.size(); ++s) {
    out << chi[s];
    if (with_lambda) out << ',' << lambda[s];
    out << ',' << chain_of[s] << '\n';
  }
}

PosteriorDraws draw_chi(const BPosterior& post, const SeedMap& map, std::span<const Point> z_obs,
                        const DPConfig& dp, Rng& rng, FMode mode, bool keep_b) {
  const std::size_t n = post.n_data;
  if (z_obs.size() != n) throw ArgumentError("covariates do not match the posterior's data");
  if (n == 0) throw ArgumentError("chi draws need at least one observation");
  const SeedChains& ch = post.chains;
  const CompressedDesign& c = post.design;
  const bool dependent = map.kind() == PriorKind::kPropensityDependent;
  const double sigma = dependent ? static_cast<const PropensityDependentPrior&>(map).sigma() : 0.0;
  if (dependent && ch.theta.empty()) throw ArgumentError("lambda draws need the theta chain");

  PosteriorDraws out;
  out.chain_of = ch.chain_of;
  out.stats = ch.stats;
  out.chi.resize(ch.draws());
  out.b_mean.assign(n, 0.0);
  if (keep_b) out.b_at_obs.resize(ch.draws() * n);

  std::vector<double> row_weight(c.rows);
  std::vector<double> b_rows(c.rows);
  std::vector<double> base_eta;
  std::vector<double> base_b;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < ch.draws(); ++s) {
    const auto eta = ch.eta_at(s);
    kernels::logistic(eta, b_rows);
    std::fill(row_weight.begin(), row_weight.end(), 0.0);
    double base_part = 0.0;
    if (mode == FMode::kEmpirical) {
      for (std::size_t i = 0; i < n; ++i) row_weight[c.row_of[i]] += inv_n;
    } else {
      FDraw f = draw_F_weights(n, map.dim(), dp, rng);
      for (std::size_t i = 0; i < n; ++i) row_weight[c.row_of[i]] += f.obs_weights[i];
      if (!f.base_atoms.empty()) {
        if (ch.theta.empty()) throw ArgumentError("base atoms need the theta chain");
        base_eta = map.eval(ch.theta_at(s), f.base_atoms);
        base_b.resize(base_eta.size());
        kernels::logistic(base_eta, base_b);
        base_part = kernels::dot(base_b, f.base_weights);
      }
    }
    out.chi[s] = kernels::dot(row_weight, b_rows) + base_part;
    for (std::size_t i = 0; i < n; ++i) out.b_mean[i] += b_rows[c.row_of[i]];
    if (keep_b) {
      for (std::size_t i = 0; i < n; ++i) out.b_at_obs[s * n + i] = b_rows[c.row_of[i]];
    }
    if (dependent) out.lambda.push_back(sigma * ch.theta_at(s).back());
  }
  for (double& b : out.b_mean) b /= static_cast<double>(ch.draws());
  return out;
}

double chain_mean_discrepancy(std::span<const double> values, std::span<const int> chain_of) {
  if (values.size() != chain_of.size()) throw ArgumentError("chain labels do not match the values");
  const int chains = values.empty() ? 0 : *std::max_element(chain_of.begin(), chain_of.end()) + 1;
  std::vector<double> sum(static_cast<std::size_t>(chains), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(chains), 0.0);
  std::vector<double> cnt(static_cast<std::size_t>(chains), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto c = static_cast<std::size_t>(chain_of[i]);
    sum[c] += values[i];
    sq[c] += values[i] * values[i];
    cnt[c] += 1.0;
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < sum.size(); ++a) {
    for (std::size_t b = a + 1; b < sum.size(); ++b) {
      if (cnt[a] < 2 || cnt[b] < 2) continue;
      const double ma = sum[a] / cnt[a];
      const double mb = sum[b] / cnt[b];
      const double va = std::max(0.0, sq[a] / cnt[a] - ma * ma);
      const double vb = std::max(0.0, sq[b] / cnt[b] - mb * mb);
      const double se = std::sqrt(va / cnt[a] + vb / cnt[b]);
      if (se > 0.0) worst = std::max(worst, std::fabs(ma - mb) / se);
    }
  }
  return worst;
}

GridFunction DensityPosterior::density(const ExpDensityMap& map, std::size_t s) const {
  const auto w = chains.eta_at(s);
  return map.density_from_log(std::vector<double>(w.begin(), w.end()));
}

DensityPosterior sample_f_density_posterior(std::span<const Point> z_obs, const ExpDensityMap& map,
                                            const SamplerConfig& config) {
  const GridFunction grid = GridFunction::constant(map.dim(), map.grid_level(), 0.0);
  DensityPosterior post;
  post.counts.assign(grid.size(), 0.0);
  for (const auto& z : z_obs) post.counts[grid.cell_index(z)] += 1.0;
  const double n = static_cast<double>(z_obs.size());
  const double log_vol = std::log(grid.cell_volume());
  std::vector<double> shifted(grid.size());
  const EtaLogLik ll = [&](std::span<const double> w) {
    if (n == 0.0) return 0.0;
    const double top = *std::max_element(w.begin(), w.end());
    for (std::size_t c = 0; c < w.size(); ++c) shifted[c] = std::exp(w[c] - top);
    const double log_norm = top + log_vol + std::log(kernels::sum(shifted));
    return kernels::dot(post.counts, w) - n * log_norm;
  };
  post.chains = elliptical_slice(map.grid_design(), grid.size(), map.seed_dim(), ll, config, false);
  return post;
}

}  // namespace bvm
