#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "bvm/errors.hpp"
#include "bvm/pilot.hpp"
#include "bvm/truth.hpp"

using namespace bvm;

namespace {

Dataset from_propensity(std::size_t n, const std::function<double(double)>& pi, Rng& rng) {
  std::uniform_real_distribution<double> unif;
  Dataset data(1);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.z = point1(unif(rng));
    o.r = unif(rng) < pi(o.z[0]) ? 1 : 0;
    o.ry = o.r;
    data.push_back(o);
  }
  return data;
}

double l2_error(const InversePropensity& a_hat, const std::function<double(double)>& a0) {
  return std::sqrt(quadrature(
      [&](const Point& z) {
        const double d = a_hat(z) - a0(z[0]);
        return d * d;
      },
      1, 12));
}

TEST(Split, SizesAndIndexSets) {
  Rng rng(1);
  const Dataset ten = from_propensity(10, [](double) { return 0.5; }, rng);
  const DataSplit s = split(ten, 0.5, 3);
  EXPECT_EQ(s.pilot.size(), 5u);
  EXPECT_EQ(s.inference.size(), 5u);
  const Dataset thousand = from_propensity(1000, [](double) { return 0.5; }, rng);
  const DataSplit t = split(thousand, 0.3, 3);
  EXPECT_EQ(t.pilot.size(), 300u);
  EXPECT_EQ(t.inference.size(), 700u);
  std::vector<std::size_t> all = t.pilot_index;
  all.insert(all.end(), t.inference_index.begin(), t.inference_index.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_TRUE(std::is_sorted(t.pilot_index.begin(), t.pilot_index.end()));
  for (std::size_t k = 0; k < t.pilot.size(); ++k) {
    EXPECT_EQ(t.pilot[k].z[0], thousand[t.pilot_index[k]].z[0]);
  }
}

TEST(Split, DeterministicInSeed) {
  Rng rng(2);
  const Dataset data = from_propensity(200, [](double) { return 0.5; }, rng);
  EXPECT_EQ(split(data, 0.5, 9).pilot_index, split(data, 0.5, 9).pilot_index);
  EXPECT_NE(split(data, 0.5, 9).pilot_index, split(data, 0.5, 10).pilot_index);
}

TEST(Split, RejectsEmptyParts) {
  Rng rng(3);
  const Dataset data = from_propensity(3, [](double) { return 0.5; }, rng);
  EXPECT_THROW(split(data, 0.01, 1), ArgumentError);
  EXPECT_THROW(split(data, 0.99, 1), ArgumentError);
}

TEST(Pilot, AllObservedHitsTheLowerClip) {
  Rng rng(4);
  const Dataset data = from_propensity(100, [](double) { return 1.0; }, rng);
  for (auto kind : {PilotKind::kRegressogram, PilotKind::kSeriesLogistic}) {
    PilotSpec spec;
    spec.kind = kind;
    const InversePropensity a = fit_pilot(data, spec);
    for (double z : {0.01, 0.3, 0.5, 0.99}) EXPECT_NEAR(a(point1(z)), 1.0 / 0.95, 1e-12);
  }
}

TEST(Pilot, SingleCellRegressogram) {
  Dataset data(1);
  const std::uint8_t rs[] = {1, 1, 0, 0};
  for (int i = 0; i < 4; ++i) data.push_back(Observation{point1(0.1 + 0.2 * i), rs[i], 0});
  PilotSpec spec;
  spec.bins = 1;
  const InversePropensity a = fit_pilot(data, spec);
  EXPECT_DOUBLE_EQ(a(point1(0.5)), 2.0);  // (2 + 0.5) / (4 + 1) = 0.5
}

TEST(Pilot, EmptyCellsFallBackToTheGlobalRate) {
  Dataset data(1);
  for (int i = 0; i < 4; ++i) data.push_back(Observation{point1(0.05 + 0.1 * i), std::uint8_t(i % 2), 0});
  PilotSpec spec;
  spec.bins = 2;
  const InversePropensity a = fit_pilot(data, spec);
  EXPECT_DOUBLE_EQ(a(point1(0.9)), 2.0);
}

TEST(Pilot, BeatsTheConstantEstimator) {
  const auto pi = [](double z) { return 0.6 * psi(std::sin(2.0 * std::numbers::pi * z)) + 0.2; };
  const auto a0 = [&](double z) { return 1.0 / pi(z); };
  Rng rng(5);
  const Dataset data = from_propensity(4000, pi, rng);
  PilotSpec spec;
  spec.bins = 16;
  const double err = l2_error(fit_pilot(data, spec), a0);
  PilotSpec flat;
  flat.bins = 1;
  const double err_const = l2_error(fit_pilot(data, flat), a0);
  EXPECT_LT(err, 0.5 * err_const);
  PilotSpec series;
  series.kind = PilotKind::kSeriesLogistic;
  series.level = 3;
  EXPECT_LT(l2_error(fit_pilot(data, series), a0), 0.5 * err_const);
}

TEST(Pilot, BoundedByTheClip) {
  Rng rng(6);
  const Dataset data = from_propensity(300, [](double z) { return z < 0.5 ? 0.02 : 0.999; }, rng);
  for (auto kind : {PilotKind::kRegressogram, PilotKind::kSeriesLogistic}) {
    PilotSpec spec;
    spec.kind = kind;
    spec.clip = 0.1;
    const GridFunction g = fit_pilot(data, spec).to_grid(10);
    for (double v : g.values()) {
      EXPECT_GE(v, 1.0 / 0.9 - 1e-12);
      EXPECT_LE(v, 10.0 + 1e-12);
    }
  }
}

TEST(Pilot, ConstantTruthBeyondTheClipStaysNearTheFloor) {
  // a0 = 1/0.97 sits below the floor 1/0.95, so the best reachable error is the gap.
  const double gap = 1.0 / 0.95 - 1.0 / 0.97;
  Rng rng(7);
  const Dataset data = from_propensity(5000, [](double) { return 0.97; }, rng);
  const double err = l2_error(fit_pilot(data, PilotSpec{}), [](double) { return 1.0 / 0.97; });
  EXPECT_GE(err, gap - 1e-12);
  EXPECT_LE(err, gap + 0.005);
}

TEST(Pilot, DefaultBins) {
  EXPECT_EQ(default_pilot_bins(1000, 1), 10);
  EXPECT_EQ(default_pilot_bins(500, 1), 8);
  EXPECT_EQ(default_pilot_bins(1, 1), 1);
}

TEST(Pilot, RejectsBadInput) {
  EXPECT_THROW(fit_pilot(Dataset(1), PilotSpec{}), ArgumentError);
  Rng rng(8);
  const Dataset data = from_propensity(20, [](double) { return 0.5; }, rng);
  PilotSpec spec;
  spec.clip = 0.6;
  EXPECT_THROW(fit_pilot(data, spec), ArgumentError);
  EXPECT_THROW(pilot_kind_from_string("kernel"), ArgumentError);
  EXPECT_EQ(pilot_kind_from_string(to_string(PilotKind::kSeriesLogistic)), PilotKind::kSeriesLogistic);
}

TEST(PilotRate, ErrorShrinksWithN) {
  TruthSpec ts;
  ts.alpha = 1.0;
  const ModelTruth truth(ts);
  // default bins 4, 8, 16, 32: aligned with the dyadic truth
  const auto rows = pilot_rate_probe(truth, PilotSpec{}, {64, 512, 4096, 32768}, 20, 11);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].median_error, rows[i - 1].median_error);
  // n^{-1/3} for a Lipschitz propensity: 512x the data should cut the error at least in half
  EXPECT_LT(rows.back().median_error, 0.5 * rows.front().median_error);
  EXPECT_EQ(rows.front().errors.size(), 20u);
}

}  // namespace
