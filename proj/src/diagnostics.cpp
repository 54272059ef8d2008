#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "bvm/diagnostics.hpp"
#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/replication.hpp"
#include "bvm/truth.hpp"

namespace bvm {
namespace {

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  return m % 2 == 1 ? x[m / 2] : 0.5 * (x[m / 2 - 1] + x[m / 2]);
}

}  // namespace

double center(const Dataset& data, CenterKind kind, const ModelTruth* truth, std::span<const double> a_hat,
              std::span<const double> b_hat) {
  if (kind == CenterKind::kOracle) {
    if (truth == nullptr) throw ArgumentError("oracle centering needs the simulation truth");
    return truth->oracle_center(data);
  }
  return aipw_estimate(data, a_hat, b_hat);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("normal quantile needs p in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ArgumentError("quantile of no draws");
  const double h = static_cast<double>(sorted.size()) * p + 0.5;
  if (h <= 1.0) return sorted.front();
  if (h >= static_cast<double>(sorted.size())) return sorted.back();
  const auto k = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(k);
  return sorted[k - 1] + frac * (sorted[k] - sorted[k - 1]);
}

NormalDistance normal_distance(std::span<const double> scaled_draws, double target_var) {
  if (scaled_draws.size() < 100) throw ArgumentError("normal distance needs at least 100 draws");
  if (!(target_var > 0.0)) throw ArgumentError("target variance must be positive");
  std::vector<double> x(scaled_draws.begin(), scaled_draws.end());
  std::sort(x.begin(), x.end());
  if (!(x.back() > x.front())) throw ArgumentError("degenerate draws: zero spread");
  const double sd = std::sqrt(target_var);
  const double m = static_cast<double>(x.size());
  NormalDistance out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i] / sd);
    out.ks = std::max({out.ks, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  std::vector<double> diffs(999);
  for (int k = 1; k <= 999; ++k) {
    const double p = k / 1000.0;
    diffs[static_cast<std::size_t>(k - 1)] = std::fabs(empirical_quantile(x, p) - sd * normal_quantile(p));
  }
  out.w1 = kernels::sum(diffs) / 999.0;
  return out;
}

std::pair<double, double> credible_interval(std::span<const double> draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("credible level must be in (0,1)");
  if (static_cast<double>(draws.size()) < 2.0 / (1.0 - level)) {
    throw ArgumentError("too few draws for a " + std::to_string(level) + " credible interval");
  }
  std::vector<double> x(draws.begin(), draws.end());
  std::sort(x.begin(), x.end());
  return {empirical_quantile(x, 0.5 * (1.0 - level)), empirical_quantile(x, 0.5 * (1.0 + level))};
}

BvmReport bvm_report(std::span<const double> chi_draws, std::size_t n, double chi_hat, double target_var,
                     double chi_true, double ci_level, CenterKind kind) {
  if (chi_draws.size() < 2) throw ArgumentError("report needs at least two draws");
  BvmReport r;
  r.center_kind = kind;
  r.chi_hat = chi_hat;
  r.target_var = target_var;
  r.ci_level = ci_level;
  const double m = static_cast<double>(chi_draws.size());
  r.post_mean = kernels::sum(chi_draws) / m;
  std::vector<double> sq(chi_draws.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (chi_draws[i] - r.post_mean) * (chi_draws[i] - r.post_mean);
  r.post_sd = std::sqrt(kernels::sum(sq) / (m - 1.0));
  const double root_n = std::sqrt(static_cast<double>(n));
  r.scaled_draws.resize(chi_draws.size());
  for (std::size_t i = 0; i < chi_draws.size(); ++i) r.scaled_draws[i] = root_n * (chi_draws[i] - chi_hat);
  const NormalDistance dist = normal_distance(r.scaled_draws, target_var);
  r.ks_dist = dist.ks;
  r.w1_dist = dist.w1;
  std::tie(r.ci_lo, r.ci_hi) = credible_interval(chi_draws, ci_level);
  r.covered = r.ci_lo <= chi_true && chi_true <= r.ci_hi;
  return r;
}

CoverageTable summarize(std::vector<ResultRow> rows) {
  CoverageTable t;
  t.reps = rows.size();
  if (rows.empty()) return t;
  std::vector<double> ks, w1, ratio;
  double covered = 0.0;
  for (const auto& r : rows) {
    covered += r.covered ? 1.0 : 0.0;
    ks.push_back(r.ks_dist);
    w1.push_back(r.w1_dist);
    ratio.push_back(r.sd_ratio);
  }
  const double m = static_cast<double>(rows.size());
  t.coverage = covered / m;
  t.coverage_se = std::sqrt(t.coverage * (1.0 - t.coverage) / m);
  t.mean_sd_ratio = kernels::sum(ratio) / m;
  t.median_ks = median(ks);
  t.median_w1 = median(w1);
  t.rows = std::move(rows);
  return t;
}

CoverageTable coverage_experiment(const ScenarioConfig& config, int jobs) {
  const ScenarioContext context(config);
  std::vector<ResultRow> rows(static_cast<std::size_t>(config.reps));
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    rows[i] = run_replication(context, static_cast<int>(i)).row;
  });
  return summarize(std::move(rows));
}

std::vector<LaplaceRow> dp_laplace_check(const GridFunction& f0, const Function& g, std::size_t n,
                                         const std::vector<double>& t_list, std::size_t mc_reps,
                                         std::uint64_t seed, const DPConfig& dp) {
  if (n == 0 || mc_reps < 2) throw ArgumentError("Laplace check needs n >= 1 and mc_reps >= 2");
  const double mass = quadrature(f0);
  if (std::fabs(mass - 1.0) > 1e-8) throw ArgumentError("F0 density does not integrate to 1");

  // Var_F0(g) by quadrature.
  const GridFunction gv = GridFunction::sample(f0.dim(), f0.level(), g);
  std::vector<double> gsq(gv.size());
  for (std::size_t i = 0; i < gsq.size(); ++i) gsq[i] = gv[i] * gv[i];
  const double mean_g = quadrature(gv, f0);
  const double var_g = quadrature(GridFunction(f0.dim(), f0.level(), gsq), f0) - mean_g * mean_g;

  // Z-sample from f0 by cell inverse CDF.
  Rng zrng = make_rng(seed, {stream_id(Stream::kData)});
  std::vector<double> cdf(f0.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = (acc += f0[i]);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double h = 1.0 / static_cast<double>(f0.cells_per_axis());
  std::vector<double> gz(n);
  std::vector<Point> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unif(zrng) * acc;
    const auto cell = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), cdf.size() - 1);
    const Point c = f0.cell_center(cell);
    for (int d = 0; d < f0.dim(); ++d) z[i][d] = c[d] + (unif(zrng) - 0.5) * h;
    gz[i] = g(z[i]);
  }
  const double empirical = kernels::sum(gz) / static_cast<double>(n);

  Rng wrng = make_rng(seed, {stream_id(Stream::kDirichlet)});
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> delta(mc_reps);
  for (std::size_t r = 0; r < mc_reps; ++r) {
    const FDraw f = draw_F_weights(n, f0.dim(), dp, wrng);
    double value = kernels::dot(f.obs_weights, gz);
    for (std::size_t k = 0; k < f.base_atoms.size(); ++k) value += f.base_weights[k] * g(f.base_atoms[k]);
    delta[r] = root_n * (value - empirical);
  }

  std::vector<LaplaceRow> table;
  std::vector<double> e(mc_reps);
  for (double t : t_list) {
    for (std::size_t r = 0; r < mc_reps; ++r) e[r] = std::exp(t * delta[r]);
    const double m = static_cast<double>(mc_reps);
    const double mean = kernels::sum(e) / m;
    std::vector<double> sq(mc_reps);
    for (std::size_t r = 0; r < mc_reps; ++r) sq[r] = (e[r] - mean) * (e[r] - mean);
    LaplaceRow row;
    row.t = t;
    row.estimate = mean;
    row.analytic = std::exp(0.5 * t * t * var_g);
    row.ratio = mean / row.analytic;
    row.mc_se = std::sqrt(kernels::sum(sq) / (m - 1.0) / m) / row.analytic;
    table.push_back(row);
  }
  return table;
}

DensityComparison density_bias_experiment(const ScenarioConfig& config, int jobs) {
  ScenarioConfig c = config;
  c.density_prior.enabled = true;
  c.posterior = PosteriorMode::kMcmc;
  const ScenarioContext context(c);
  std::vector<ReplicationOutcome> outs(static_cast<std::size_t>(c.reps));
  parallel_for(outs.size(), jobs, [&](std::size_t i) { outs[i] = run_replication(context, static_cast<int>(i)); });
  std::vector<ResultRow> dp_rows, f_rows;
  double dp_bias = 0.0, f_bias = 0.0, not_worse = 0.0;
  for (const auto& o : outs) {
    dp_rows.push_back(o.row);
    f_rows.push_back(*o.density_row);
    const double a = std::fabs(o.row.post_mean - o.row.chi_true);
    const double b = std::fabs(o.density_row->post_mean - o.density_row->chi_true);
    dp_bias += a;
    f_bias += b;
    not_worse += a <= b ? 1.0 : 0.0;
  }
  const double m = static_cast<double>(outs.size());
  DensityComparison out;
  out.dp = summarize(std::move(dp_rows));
  out.density = summarize(std::move(f_rows));
  out.dp_mean_abs_bias = dp_bias / m;
  out.density_mean_abs_bias = f_bias / m;
  out.dp_not_worse_share = not_worse / m;
  return out;
}

}  // namespace bvm
