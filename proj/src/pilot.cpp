#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "bvm/errors.hpp"
#include "bvm/kernels.hpp"
#include "bvm/pilot.hpp"
#include "bvm/rng.hpp"
#include "bvm/truth.hpp"

namespace bvm {
namespace {

std::size_t axis_bin(double x, int bins) {
  const auto b = static_cast<std::size_t>(bins);
  if (!(x > 0.0)) return 0;
  return std::min(b - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
}

std::size_t bin_index(const Point& z, int dim, int bins) {
  std::size_t idx = 0;
  for (int d = 0; d < dim; ++d) idx = idx * static_cast<std::size_t>(bins) + axis_bin(z[d], bins);
  return idx;
}

double clip_to_a(double p, double clip) {
  return 1.0 / std::clamp(p, clip, 1.0 - clip);
}

}  // namespace

std::string to_string(PilotKind kind) {
  return kind == PilotKind::kRegressogram ? "regressogram" : "series-logistic";
}

PilotKind pilot_kind_from_string(const std::string& name) {
  if (name == "regressogram") return PilotKind::kRegressogram;
  if (name == "series-logistic") return PilotKind::kSeriesLogistic;
  throw ArgumentError("unknown pilot kind '" + name + "'");
}

DataSplit split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must be in (0,1)");
  const std::size_t n = data.size();
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n < 2 || m == 0 || m == n) throw ArgumentError("degenerate split: one part would be empty");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  // Fisher-Yates with an explicit uniform so the partition does not depend on
  // the standard library's shuffle.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i)(rng);
    std::swap(perm[i], perm[j]);
  }
  DataSplit s;
  s.pilot_index.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
  s.inference_index.assign(perm.begin() + static_cast<std::ptrdiff_t>(m), perm.end());
  std::sort(s.pilot_index.begin(), s.pilot_index.end());
  std::sort(s.inference_index.begin(), s.inference_index.end());
  s.pilot = Dataset(data.dim());
  s.inference = Dataset(data.dim());
  for (std::size_t i : s.pilot_index) s.pilot.push_back(data[i]);
  for (std::size_t i : s.inference_index) s.inference.push_back(data[i]);
  return s;
}

int default_pilot_bins(std::size_t n_pilot, int dim) {
  return std::max(1, static_cast<int>(std::ceil(
                         std::pow(static_cast<double>(n_pilot), 1.0 / (2.0 + dim)) - 1e-12)));
}

double InversePropensity::operator()(const Point& z) const {
  if (kind_ == PilotKind::kRegressogram) return cell_a_[bin_index(z, dim_, bins_)];
  const WaveletBasis basis(WaveletFamily::kHaar, dim_, level_);
  const std::array<Point, 1> pts{z};
  const std::vector<double> row = basis.design(pts);
  return clip_to_a(psi(kernels::dot(row, coef_)), clip_);
}

Function InversePropensity::as_function() const {
  if (kind_ == PilotKind::kRegressogram) {
    return [cells = cell_a_, dim = dim_, bins = bins_](const Point& z) {
      return cells[bin_index(z, dim, bins)];
    };
  }
  return [self = *this](const Point& z) { return self(z); };
}

GridFunction InversePropensity::to_grid(int level) const {
  if (kind_ == PilotKind::kRegressogram) return GridFunction::sample(dim_, level, as_function());
  GridFunction g = GridFunction::constant(dim_, level, 0.0);
  std::vector<Point> centers(g.size());
  for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = g.cell_center(i);
  const WaveletBasis basis(WaveletFamily::kHaar, dim_, level_);
  const std::vector<double> d = basis.design(centers);
  std::vector<double> eta(centers.size());
  kernels::gemv(d, centers.size(), basis.size(), coef_, eta);
  auto values = g.mutable_values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = clip_to_a(psi(eta[i]), clip_);
  return g;
}

InversePropensity fit_pilot(const Dataset& pilot_set, const PilotSpec& spec) {
  if (pilot_set.empty()) throw ArgumentError("pilot set is empty");
  if (!(spec.clip > 0.0 && spec.clip < 0.5)) throw ArgumentError("pilot clip must be in (0, 0.5)");
  InversePropensity a;
  a.kind_ = spec.kind;
  a.dim_ = pilot_set.dim();
  a.clip_ = spec.clip;
  const double n = static_cast<double>(pilot_set.size());
  const double global = (static_cast<double>(pilot_set.observed_count()) + 0.5) / (n + 1.0);

  if (spec.kind == PilotKind::kRegressogram) {
    a.bins_ = spec.bins > 0 ? spec.bins : default_pilot_bins(pilot_set.size(), a.dim_);
    std::size_t cells = 1;
    for (int d = 0; d < a.dim_; ++d) cells *= static_cast<std::size_t>(a.bins_);
    std::vector<double> count(cells, 0.0);
    std::vector<double> hits(cells, 0.0);
    for (const auto& o : pilot_set) {
      const std::size_t c = bin_index(o.z, a.dim_, a.bins_);
      count[c] += 1.0;
      hits[c] += o.r;
    }
    a.cell_a_.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      const double p = count[c] > 0.0 ? (hits[c] + 0.5) / (count[c] + 1.0) : global;
      a.cell_a_[c] = clip_to_a(p, spec.clip);
    }
    return a;
  }

  if (spec.level < 0 || spec.level > 10) throw ArgumentError("series-logistic level out of range");
  a.level_ = spec.level;
  const WaveletBasis basis(WaveletFamily::kHaar, a.dim_, spec.level);
  const std::vector<Point> z = pilot_set.covariates();
  const std::vector<double> d = basis.design(z);
  const auto rows = static_cast<Eigen::Index>(z.size());
  const auto cols = static_cast<Eigen::Index>(basis.size());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      d.data(), rows, cols);
  Eigen::VectorXd r(rows);
  for (Eigen::Index i = 0; i < rows; ++i) r[i] = pilot_set[static_cast<std::size_t>(i)].r;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
  beta[0] = psi_inv(global);
  constexpr double kRidge = 1e-3;
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd w(rows);
    Eigen::VectorXd work(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double p = psi(eta[i]);
      w[i] = std::max(p * (1.0 - p), 1e-10);
      work[i] = eta[i] + (r[i] - p) / w[i];
    }
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal().array() += kRidge;
    const Eigen::VectorXd next = h.ldlt().solve(x.transpose() * (w.asDiagonal() * work));
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < 1e-10) break;
  }
  a.coef_.assign(beta.data(), beta.data() + beta.size());
  return a;
}

double pilot_l2_error(const InversePropensity& a_hat, const ModelTruth& truth) {
  const GridFunction& f0 = truth.density();
  const GridFunction fitted = a_hat.to_grid(f0.level());
  const GridFunction& pi0 = truth.propensity();
  std::vector<double> sq(f0.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double diff = fitted[i] - 1.0 / pi0[i];
    sq[i] = diff * diff;
  }
  return std::sqrt(quadrature(GridFunction(f0.dim(), f0.level(), std::move(sq)), f0));
}

std::vector<PilotRateRow> pilot_rate_probe(const ModelTruth& truth, const PilotSpec& spec,
                                           const std::vector<std::size_t>& n_list, int reps,
                                           std::uint64_t seed) {
  if (reps < 1) throw ArgumentError("pilot rate probe needs reps >= 1");
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw ArgumentError("n_list must be increasing");
  std::vector<PilotRateRow> table;
  for (std::size_t n : n_list) {
    PilotRateRow row;
    row.n = n;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng = make_rng(seed, {stream_id(Stream::kPilot), n, static_cast<std::uint64_t>(rep)});
      const Dataset data = truth.simulate(n, rng);
      row.errors.push_back(pilot_l2_error(fit_pilot(data, spec), truth));
    }
    std::vector<double> sorted = row.errors;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    row.median_error = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace bvm
