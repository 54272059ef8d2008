#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "bvm/diagnostics.hpp"
#include "bvm/errors.hpp"
#include "bvm/truth.hpp"

using namespace bvm;

namespace {

std::vector<double> normal_draws(std::size_t m, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> norm(mean, sd);
  std::vector<double> v(m);
  for (double& x : v) x = norm(rng);
  return v;
}

TEST(Normal, ReferenceValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540053856, 1e-14);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795638, 1e-15);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_cdf(normal_quantile(1e-6)), 1e-6, 1e-18);
  EXPECT_THROW(normal_quantile(0.0), ArgumentError);
  EXPECT_THROW(normal_quantile(1.0), ArgumentError);
}

TEST(EmpiricalQuantile, HazenRule) {
  const std::vector<double> x = {10.0, 20.0, 30.0, 40.0};
  EXPECT_DOUBLE_EQ(empirical_quantile(x, 0.5), 25.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(x, 0.125), 10.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(x, 0.3), 17.0);  // h = 1.7
  EXPECT_DOUBLE_EQ(empirical_quantile(x, 0.01), 10.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(x, 0.99), 40.0);
  EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), ArgumentError);
}

TEST(NormalDistance, MatchingDrawsAreClose) {
  const auto v = normal_draws(100000, 0.0, std::sqrt(2.5), 1);
  const NormalDistance d = normal_distance(v, 2.5);
  EXPECT_LE(d.ks, 0.01);
  EXPECT_LE(d.w1, 0.02);
}

TEST(NormalDistance, ShiftShowsUpInW1) {
  const auto v = normal_draws(100000, 1.0, 1.0, 2);
  const NormalDistance d = normal_distance(v, 1.0);
  EXPECT_NEAR(d.w1, 1.0, 0.02);
  EXPECT_NEAR(d.ks, 2.0 * normal_cdf(0.5) - 1.0, 0.01);
}

TEST(NormalDistance, ScaleError) {
  // sup |Phi(x / sqrt2) - Phi(x)|, attained at x^2 = 2 log 2
  const auto v = normal_draws(100000, 0.0, std::sqrt(2.0), 3);
  EXPECT_NEAR(normal_distance(v, 1.0).ks, 0.0830320374917564, 0.006);
}

TEST(NormalDistance, Preconditions) {
  EXPECT_THROW(normal_distance(std::vector<double>(99, 0.1), 1.0), ArgumentError);
  EXPECT_THROW(normal_distance(std::vector<double>(200, 0.1), 1.0), ArgumentError);
  EXPECT_THROW(normal_distance(normal_draws(200, 0, 1, 4), 0.0), ArgumentError);
}

TEST(CredibleInterval, Examples) {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 1.0);
  const auto [lo, hi] = credible_interval(x, 0.9);
  EXPECT_DOUBLE_EQ(lo, 5.5);
  EXPECT_DOUBLE_EQ(hi, 95.5);
  const auto [clo, chi] = credible_interval(std::vector<double>(100, 0.3), 0.95);
  EXPECT_EQ(clo, 0.3);
  EXPECT_EQ(chi, 0.3);
  EXPECT_THROW(credible_interval(std::vector<double>(39, 0.0), 0.95), ArgumentError);
  EXPECT_NO_THROW(credible_interval(std::vector<double>(40, 0.0), 0.95));
}

TEST(CredibleInterval, SymmetricDraws) {
  auto v = normal_draws(5001, 0.0, 1.0, 5);
  const std::size_t half = v.size() / 2;
  for (std::size_t i = 0; i < half; ++i) v[half + 1 + i] = -v[i];
  v[half] = 0.0;
  const auto [lo, hi] = credible_interval(v, 0.95);
  EXPECT_NEAR(lo, -hi, 1e-12);
}

TEST(Report, ScalesAndCovers) {
  const std::size_t n = 400;
  auto chi = normal_draws(4000, 0.3, 0.05, 6);  // sqrt(n) * 0.05 = 1
  const BvmReport r = bvm_report(chi, n, 0.3, 1.0, 0.31, 0.95, CenterKind::kOracle);
  EXPECT_NEAR(r.post_mean, 0.3, 0.003);
  EXPECT_NEAR(r.post_sd, 0.05, 0.002);
  EXPECT_NEAR(r.scaled_draws[7], 20.0 * (chi[7] - 0.3), 1e-12);
  EXPECT_LT(r.ks_dist, 0.03);
  EXPECT_TRUE(r.covered);
  EXPECT_NEAR(r.ci_lo, 0.3 - 1.96 * 0.05, 0.01);
  const BvmReport miss = bvm_report(chi, n, 0.3, 1.0, 0.5, 0.95, CenterKind::kOracle);
  EXPECT_FALSE(miss.covered);
}

TEST(Center, OracleMatchesTheInfluenceFunction) {
  TruthSpec ts;
  ts.alpha = 1.0;
  ts.beta = 1.0;
  const ModelTruth truth(ts);
  Rng rng(7);
  const Dataset data = truth.simulate(500, rng);
  const ParamTriple p = truth.params();
  double s = 0.0;
  for (const auto& o : data) s += efficient_influence(o, p, truth.chi());
  EXPECT_NEAR(center(data, CenterKind::kOracle, &truth), truth.chi() + s / 500.0, 1e-12);
  EXPECT_THROW(center(data, CenterKind::kOracle, nullptr), ArgumentError);
}

TEST(Center, SingleMissingObservation) {
  TruthSpec ts;
  ts.amp_a = 0.0;
  ts.amp_b = 0.0;
  const ModelTruth truth(ts);
  ASSERT_NEAR(truth.chi(), 0.5, 1e-15);
  Dataset data(1);
  data.push_back({point1(0.4), 0, 0});
  EXPECT_NEAR(center(data, CenterKind::kOracle, &truth), 0.5, 1e-15);
}

TEST(Center, AipwWithUnitWeightsIsTheSampleMean) {
  Dataset data(1);
  const std::uint8_t y[] = {1, 0, 1, 1, 0};
  for (int i = 0; i < 5; ++i) data.push_back({point1(0.1 * (i + 1)), 1, y[i]});
  const std::vector<double> a(5, 1.0);
  const std::vector<double> b = {0.1, 0.9, 0.3, 0.5, 0.2};
  EXPECT_NEAR(center(data, CenterKind::kAipw, nullptr, a, b), 0.6, 1e-15);
}

TEST(Center, OracleCenterFollowsTheClt) {
  TruthSpec ts;
  ts.alpha = 1.0;
  ts.beta = 1.0;
  const ModelTruth truth(ts);
  const std::size_t n = 500;
  const int reps = 200;
  std::vector<double> c(reps);
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(42, {static_cast<std::uint64_t>(r)});
    c[r] = center(truth.simulate(n, rng), CenterKind::kOracle, &truth);
  }
  double m = 0.0, v = 0.0;
  for (double x : c) m += x;
  m /= reps;
  for (double x : c) v += (x - m) * (x - m);
  v /= reps - 1;
  const double target = truth.summary().var_eff / n;
  EXPECT_LE(std::fabs(m - truth.chi()), 3.0 * std::sqrt(target / reps));
  EXPECT_NEAR(v / target, 1.0, 0.25);
}

TEST(Center, AipwWithFittedValues) {
  Dataset data(1);
  data.push_back({point1(0.1), 1, 1});
  data.push_back({point1(0.2), 1, 0});
  data.push_back({point1(0.3), 0, 0});
  const std::vector<double> a = {2.0, 2.0, 2.0};
  const std::vector<double> b = {0.5, 0.5, 0.5};
  // (2*0.5 + 0.5 + 2*(-0.5) + 0.5 + 0.5) / 3
  EXPECT_NEAR(center(data, CenterKind::kAipw, nullptr, a, b), 0.5, 1e-15);
  EXPECT_THROW(center(data, CenterKind::kAipw, nullptr, a, std::vector<double>{0.5}), ArgumentError);
}

TEST(Summarize, CoverageAndMedians) {
  std::vector<ResultRow> rows(4);
  for (int i = 0; i < 4; ++i) {
    rows[i].covered = i != 2;
    rows[i].ks_dist = 0.1 * (i + 1);
    rows[i].w1_dist = 1.0 * (4 - i);
    rows[i].sd_ratio = 1.0 + 0.1 * i;
  }
  const CoverageTable t = summarize(rows);
  EXPECT_EQ(t.reps, 4u);
  EXPECT_DOUBLE_EQ(t.coverage, 0.75);
  EXPECT_DOUBLE_EQ(t.coverage_se, std::sqrt(0.75 * 0.25 / 4.0));
  EXPECT_DOUBLE_EQ(t.median_ks, 0.25);
  EXPECT_DOUBLE_EQ(t.median_w1, 2.5);
  EXPECT_DOUBLE_EQ(t.mean_sd_ratio, 1.15);
  EXPECT_EQ(summarize({}).reps, 0u);
}

TEST(Laplace, BayesianBootstrapMatchesTheNormalTransform) {
  const GridFunction f0 = GridFunction::constant(1, 10, 1.0);
  const auto rows = dp_laplace_check(f0, [](const Point& z) { return z[0]; }, 2000,
                                     {-1.0, 0.5, 1.0}, 100000, 3);
  ASSERT_EQ(rows.size(), 3u);
  // Var(U) = 1/12
  EXPECT_NEAR(rows[1].analytic, 1.0104711090105978, 1e-6);
  EXPECT_NEAR(rows[2].analytic, 1.0425469051899914, 1e-6);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.ratio, 1.0, 0.01) << "t=" << r.t;
    EXPECT_LT(r.mc_se, 0.002);
  }
}

TEST(Laplace, ConstantFunctionGivesRatioOne) {
  const GridFunction f0 = GridFunction::constant(1, 6, 1.0);
  const auto rows = dp_laplace_check(f0, [](const Point&) { return 0.7; }, 100, {-1.0, 0.5, 1.0}, 1000, 2);
  for (const auto& r : rows) EXPECT_NEAR(r.ratio, 1.0, 1e-12);
}

TEST(Laplace, ZeroTIsExact) {
  const GridFunction f0 = GridFunction::constant(1, 6, 1.0);
  const auto rows = dp_laplace_check(f0, [](const Point& z) { return z[0]; }, 50, {0.0}, 10, 1);
  EXPECT_DOUBLE_EQ(rows[0].ratio, 1.0);
  EXPECT_EQ(rows[0].mc_se, 0.0);
  EXPECT_THROW(dp_laplace_check(GridFunction::constant(1, 6, 2.0), [](const Point&) { return 0.0; }, 50,
                                {0.0}, 10, 1),
               ArgumentError);
}

}  // namespace

namespace {

TEST(DensityComparison, SmoothUniformDensityBothPipelinesCover) {
  ScenarioConfig c;
  c.n = 1000;
  c.reps = 200;
  c.master_seed = 17;
  c.density_prior.enabled = true;
  const DensityComparison r = density_bias_experiment(c, 0);
  EXPECT_GE(r.dp.coverage, 0.90);
  EXPECT_LE(r.dp.coverage, 0.99);
  EXPECT_GE(r.density.coverage, 0.90);
  EXPECT_LE(r.density.coverage, 0.99);
  // paired: the b-chain and data are shared, so the rows differ only in F
  for (std::size_t i = 0; i < r.dp.rows.size(); ++i) {
    EXPECT_EQ(r.dp.rows[i].chi_hat, r.density.rows[i].chi_hat);
    EXPECT_EQ(r.dp.rows[i].seed, r.density.rows[i].seed);
  }
}

}  // namespace
