#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "bvm/diagnostics.hpp"
#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/pilot.hpp"
#include "bvm/priors.hpp"
#include "bvm/replication.hpp"
#include "bvm/sampler.hpp"

namespace bvm {
namespace {

std::uint64_t rep_seed(const ScenarioConfig& c, int rep) {
  return derive_seed(c.master_seed, {static_cast<std::uint64_t>(rep)});
}

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return derive_seed(seed, {stream_id(s)}); }

ResultRow score(std::span<const double> draws, std::size_t n, double chi_hat, const EfficientSummary& eff,
                double ci_level, CenterKind kind) {
  const BvmReport rep = bvm_report(draws, n, chi_hat, eff.var_eff, eff.chi, ci_level, kind);
  ResultRow row;
  row.chi_true = eff.chi;
  row.chi_hat = chi_hat;
  row.post_mean = rep.post_mean;
  row.post_sd = rep.post_sd;
  row.ci_lo = rep.ci_lo;
  row.ci_hi = rep.ci_hi;
  row.covered = rep.covered;
  row.ks_dist = rep.ks_dist;
  row.w1_dist = rep.w1_dist;
  row.sd_ratio = rep.post_sd * std::sqrt(static_cast<double>(n) / eff.var_eff);
  return row;
}

int grid_margin(WaveletFamily family) { return family == WaveletFamily::kHaar ? 1 : 3; }

}  // namespace

ScenarioContext::ScenarioContext(ScenarioConfig config)
    : config_(std::move(config)), truth_(std::make_shared<ModelTruth>(truth_spec(config_))) {
  validate(config_);
}

ReplicationOutcome run_replication(const ScenarioContext& context, int rep) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig& c = context.config();
  const ModelTruth& truth = context.truth();
  const EfficientSummary& eff = truth.summary();
  const std::uint64_t seed = rep_seed(c, rep);

  Rng data_rng(stream_seed(seed, Stream::kData));
  const Dataset data = truth.simulate(c.n, data_rng);

  const bool dependent = c.prior.kind == PriorKind::kPropensityDependent;
  const bool need_pilot = c.posterior == PosteriorMode::kMcmc &&
                          (dependent || c.center_kind == CenterKind::kAipw);
  Dataset inference = data;
  std::optional<InversePropensity> a_hat;
  if (need_pilot) {
    if (c.pilot.reuse) {
      a_hat = fit_pilot(data, c.pilot);
    } else {
      DataSplit parts = split(data, c.pilot.split_fraction, stream_seed(seed, Stream::kSplit));
      a_hat = fit_pilot(parts.pilot, c.pilot);
      inference = std::move(parts.inference);
    }
  }
  const std::size_t n = inference.size();
  const std::vector<Point> z = inference.covariates();

  ReplicationOutcome out;
  if (c.posterior == PosteriorMode::kExactNormal) {
    const double chi_hat = truth.oracle_center(inference);
    Rng rng(stream_seed(seed, Stream::kSanity));
    std::normal_distribution<double> norm(chi_hat, std::sqrt(eff.var_eff / static_cast<double>(n)));
    std::vector<double> draws(static_cast<std::size_t>(c.sampler.draws) *
                              static_cast<std::size_t>(c.sampler.chains));
    for (double& x : draws) x = norm(rng);
    out.row = score(draws, n, chi_hat, eff, c.ci_level, CenterKind::kOracle);
  } else {
    SeriesPriorSpec series;
    series.betabar = c.prior.betabar;
    series.r = c.prior.r;
    series.n = n;
    series.dim = c.d;
    series.family = c.prior.family;
    std::shared_ptr<const SeedMap> map;
    if (c.prior.kind == PriorKind::kRiemannLiouville) {
      map = std::make_shared<RiemannLiouvillePrior>(RLPriorSpec{c.prior.betabar, c.prior.grid_level});
    } else {
      map = std::make_shared<SeriesPrior>(series);
    }
    if (dependent) {
      map = std::make_shared<PropensityDependentPrior>(map, a_hat->as_function(), c.prior.sigma_lambda);
    }

    // Density pipeline: b is also read off on the grid where f lives.
    std::shared_ptr<const ExpDensityMap> density_map;
    std::vector<Point> grid_points;
    if (c.density_prior.enabled) {
      SeriesPriorSpec fspec = series;
      fspec.betabar = c.density_prior.gammabar;
      fspec.r = c.density_prior.r;
      const int jb = series_truncation(series.betabar, n, c.d);
      const int level = std::max(jb, series_truncation(fspec.betabar, n, c.d)) + grid_margin(series.family);
      density_map = std::make_shared<ExpDensityMap>(std::make_shared<SeriesPrior>(fspec), level);
      const GridFunction grid = GridFunction::constant(c.d, level, 0.0);
      for (std::size_t i = 0; i < grid.size(); ++i) grid_points.push_back(grid.cell_center(i));
    }

    SamplerConfig sc = c.sampler;
    sc.seed = stream_seed(seed, Stream::kChain);
    const BPosterior post = sample_b_posterior(inference, *map, sc, grid_points);
    Rng f_rng(stream_seed(seed, Stream::kDirichlet));
    const PosteriorDraws draws = draw_chi(post, *map, z, c.dp, f_rng);

    double chi_hat = 0.0;
    if (c.center_kind == CenterKind::kOracle) {
      chi_hat = truth.oracle_center(inference);
    } else {
      std::vector<double> a_values(n);
      for (std::size_t i = 0; i < n; ++i) a_values[i] = (*a_hat)(z[i]);
      chi_hat = center(inference, CenterKind::kAipw, nullptr, a_values, draws.b_mean);
    }
    out.row = score(draws.chi, n, chi_hat, eff, c.ci_level, c.center_kind);

    if (density_map) {
      SamplerConfig fc = c.sampler;
      fc.seed = stream_seed(seed, Stream::kDensityChain);
      const DensityPosterior fpost = sample_f_density_posterior(z, *density_map, fc);
      const CompressedDesign& design = post.design;
      const std::size_t cells = grid_points.size();
      std::vector<double> b_grid(cells);
      std::vector<double> eta_grid(cells);
      std::vector<double> chi(post.chains.draws());
      for (std::size_t s = 0; s < chi.size(); ++s) {
        const auto eta = post.chains.eta_at(s);
        for (std::size_t k = 0; k < cells; ++k) eta_grid[k] = eta[design.row_of[n + k]];
        kernels::logistic(eta_grid, b_grid);
        const GridFunction f = fpost.density(*density_map, s);
        chi[s] = kernels::dot(f.values(), b_grid) * f.cell_volume();
      }
      out.density_row = score(chi, n, chi_hat, eff, c.ci_level, c.center_kind);
    }
  }

  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.row.rep_id = rep;
  out.row.seed = seed;
  out.row.runtime_ms = ms;
  if (out.density_row) {
    out.density_row->rep_id = rep;
    out.density_row->seed = seed;
    out.density_row->runtime_ms = ms;
  }
  return out;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bvm
