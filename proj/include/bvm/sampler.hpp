#pragma once

// Posterior sampling for (b, F): elliptical slice sampling over the Gaussian
// seed of a linear SeedMap, combined with exact Dirichlet-process (Bayesian
// bootstrap when the base mass is zero) draws of F.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "bvm/model.hpp"
#include "bvm/priors.hpp"
#include "bvm/rng.hpp"

namespace bvm {

struct SamplerConfig {
  int burnin = 500;
  int draws = 2000;  // retained per chain
  int thin = 2;
  int chains = 2;
  std::uint64_t seed = 1;
};

struct DPConfig {
  double base_mass = 0.0;  // 0 = Bayesian bootstrap; base measure is uniform
  int stick_truncation = 1000;
};

void validate(const SamplerConfig& config);

// Evaluation points reduced to their distinct design rows, with binomial
// counts summed per row.
struct CompressedDesign {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // rows x cols, row-major
  std::vector<double> successes;
  std::vector<double> trials;
  std::vector<std::size_t> row_of;  // input point -> row
};

CompressedDesign compress_design(const SeedMap& map, std::span<const Point> points,
                                 std::span<const double> successes, std::span<const double> trials);

using EtaLogLik = std::function<double(std::span<const double> eta)>;

struct ChainStats {
  double loglik_evals_per_step = 0.0;
};

// Retained states of all chains, chain after chain.
struct SeedChains {
  std::size_t seed_dim = 0;
  std::size_t eta_dim = 0;
  std::vector<double> theta;  // draws x seed_dim (empty unless kept)
  std::vector<double> eta;    // draws x eta_dim, eta = D theta
  std::vector<int> chain_of;
  std::vector<ChainStats> stats;

  std::size_t draws() const { return chain_of.size(); }
  std::span<const double> theta_at(std::size_t s) const {
    return std::span(theta).subspan(s * seed_dim, seed_dim);
  }
  std::span<const double> eta_at(std::size_t s) const {
    return std::span(eta).subspan(s * eta_dim, eta_dim);
  }
};

// Elliptical slice sampling for the target N(theta; 0, I) exp(loglik(D theta)).
// Chain c is initialized from an exact prior draw of the stream
// (config.seed, chain, c). DomainError on a non-finite log-likelihood.
SeedChains elliptical_slice(std::span<const double> design, std::size_t rows, std::size_t cols,
                            const EtaLogLik& loglik, const SamplerConfig& config,
                            bool keep_theta = true);

struct BPosterior {
  CompressedDesign design;  // rows cover the data points, then `extra` points
  SeedChains chains;
  std::size_t n_data = 0;
};

// Posterior of theta under the l^b likelihood of `data` (only r = 1
// observations carry information). `extra` points get zero-count rows so b
// can be read off there too.
BPosterior sample_b_posterior(const Dataset& data, const SeedMap& map, const SamplerConfig& config,
                              std::span<const Point> extra = {});

// Weights of a DP(base_mass * U + sum delta_{z_i}) draw: Dirichlet(1,...,1)
// on the data when base_mass = 0; otherwise (W0, W1..Wn) ~ Dirichlet(base_mass,
// 1,...,1) with W0 spread over stick-breaking atoms from the uniform base.
// Stick-breaking stops at stick_truncation atoms, or earlier once the
// unassigned mass is below 1e-15; the remainder goes to the last atom.
struct FDraw {
  std::vector<double> obs_weights;
  std::vector<Point> base_atoms;
  std::vector<double> base_weights;
};

FDraw draw_F_weights(std::size_t n, int dim, const DPConfig& dp, Rng& rng);
DiscreteDistribution draw_F(std::span<const Point> z_obs, int dim, const DPConfig& dp, Rng& rng);

enum class FMode { kDirichlet, kEmpirical };

struct PosteriorDraws {
  std::vector<double> chi;
  std::vector<double> lambda;  // propensity-dependent prior only
  std::vector<int> chain_of;
  std::vector<ChainStats> stats;
  std::vector<double> b_mean;  // posterior mean of b at the data points
  std::vector<double> b_at_obs;  // draws x n, only when requested

  double mean() const;
  double sd() const;
  void write_csv(std::ostream& out) const;
};

// chi^(s) = sum_i W_i^(s) b^(s)(z_i) (+ base part), one F draw per retained
// theta draw from `rng`. kEmpirical replaces W by 1/n.
PosteriorDraws draw_chi(const BPosterior& post, const SeedMap& map, std::span<const Point> z_obs,
                        const DPConfig& dp, Rng& rng, FMode mode = FMode::kDirichlet,
                        bool keep_b = false);

// max |mean_c - mean_c'| between chains in units of the pooled Monte Carlo
// standard error. Chains are treated as independent draws.
double chain_mean_discrepancy(std::span<const double> values, std::span<const int> chain_of);

struct DensityPosterior {
  SeedChains chains;  // eta = W at the map's grid cells
  std::vector<double> counts;

  GridFunction density(const ExpDensityMap& map, std::size_t s) const;
};

// Posterior of the exp-density seed under l^f = sum_c m_c W_c - n log sum_c
// vol e^{W_c}, m_c the number of observations in grid cell c.
DensityPosterior sample_f_density_posterior(std::span<const Point> z_obs, const ExpDensityMap& map,
                                            const SamplerConfig& config);

}  // namespace bvm
