#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bvm/errors.hpp"
#include "bvm/function_space.hpp"
#include "bvm/rng.hpp"

namespace bvm {
namespace {

// One periodized analysis step on len entries spaced by stride.
void analysis_step(double* data, std::size_t stride, std::size_t len,
                   const std::vector<double>& low, const std::vector<double>& high,
                   std::vector<double>& scratch) {
  const std::size_t half = len / 2;
  scratch.assign(len, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t m = 0; m < low.size(); ++m) {
      const double v = data[((2 * k + m) % len) * stride];
      lo += low[m] * v;
      hi += high[m] * v;
    }
    scratch[k] = lo;
    scratch[half + k] = hi;
  }
  for (std::size_t i = 0; i < len; ++i) data[i * stride] = scratch[i];
}

void synthesis_step(double* data, std::size_t stride, std::size_t len,
                    const std::vector<double>& low, const std::vector<double>& high,
                    std::vector<double>& scratch) {
  const std::size_t half = len / 2;
  scratch.assign(len, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double lo = data[k * stride];
    const double hi = data[(half + k) * stride];
    for (std::size_t m = 0; m < low.size(); ++m) {
      scratch[(2 * k + m) % len] += low[m] * lo + high[m] * hi;
    }
  }
  for (std::size_t i = 0; i < len; ++i) data[i * stride] = scratch[i];
}

double haar_psi(double t) {
  if (t < 0.0 || t >= 1.0) return 0.0;
  return t < 0.5 ? 1.0 : -1.0;
}

double haar_phi(double t) { return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0; }

double interior(double x) {
  return std::clamp(x, 0.0, std::nextafter(1.0, 0.0));
}

}  // namespace

std::string to_string(WaveletFamily family) {
  return family == WaveletFamily::kHaar ? "haar" : "daubechies4";
}

WaveletFamily wavelet_family_from_string(const std::string& name) {
  if (name == "haar") return WaveletFamily::kHaar;
  if (name == "daubechies4" || name == "db4" || name == "d4") return WaveletFamily::kDaubechies4;
  throw ArgumentError("unknown wavelet family '" + name + "'");
}

WaveletBasis::WaveletBasis(WaveletFamily family, int dim, int max_level)
    : family_(family), dim_(dim), max_level_(max_level) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("wavelet basis dimension must be 1 or 2");
  if (max_level < -1 || max_level > 20) throw ArgumentError("wavelet max_level out of range");
  if (family == WaveletFamily::kHaar) {
    low_ = {M_SQRT1_2, M_SQRT1_2};
  } else {
    const double s3 = std::sqrt(3.0);
    const double norm = 4.0 * std::sqrt(2.0);
    low_ = {(1 + s3) / norm, (3 + s3) / norm, (3 - s3) / norm, (1 - s3) / norm};
  }
  const std::size_t len = low_.size();
  high_.resize(len);
  for (std::size_t m = 0; m < len; ++m) {
    high_[m] = ((m % 2 == 0) ? 1.0 : -1.0) * low_[len - 1 - m];
  }
}

std::size_t WaveletBasis::level_size(int j) const {
  if (j < 0) return 1;
  return static_cast<std::size_t>(types()) << (j * dim_);
}

std::size_t WaveletBasis::level_offset(int j) const {
  std::size_t offset = 0;
  for (int l = -1; l < j; ++l) offset += level_size(l);
  return offset;
}

BasisIndex WaveletBasis::index(std::size_t flat) const {
  if (flat >= size()) throw ArgumentError("basis index out of range");
  if (flat == 0) return {};
  int j = 0;
  while (flat >= level_offset(j + 1)) ++j;
  std::size_t rem = flat - level_offset(j);
  const std::size_t per_type = std::size_t{1} << (j * dim_);
  BasisIndex b;
  b.level = j;
  b.type = dim_ == 1 ? 0 : static_cast<int>(rem / per_type) + 1;
  rem %= per_type;
  if (dim_ == 1) {
    b.k = {static_cast<int>(rem), 0};
  } else {
    const std::size_t side = std::size_t{1} << j;
    b.k = {static_cast<int>(rem / side), static_cast<int>(rem % side)};
  }
  return b;
}

std::size_t WaveletBasis::flat(const BasisIndex& b) const {
  if (b.level < 0) return 0;
  if (b.level > max_level_) throw ArgumentError("basis level above max_level");
  const int side = 1 << b.level;
  for (int d = 0; d < dim_; ++d) {
    if (b.k[d] < 0 || b.k[d] >= side) throw ArgumentError("basis translation index out of range");
  }
  if (dim_ == 1 && b.type != 0) throw ArgumentError("basis type must be 0 in one dimension");
  if (dim_ == 2 && (b.type < 1 || b.type > 3)) throw ArgumentError("basis type must be 1..3 in two dimensions");
  const std::size_t per_type = std::size_t{1} << (b.level * dim_);
  std::size_t pos = level_offset(b.level);
  if (dim_ == 1) return pos + static_cast<std::size_t>(b.k[0]);
  pos += static_cast<std::size_t>(b.type - 1) * per_type;
  return pos + static_cast<std::size_t>(b.k[0]) * static_cast<std::size_t>(side) +
         static_cast<std::size_t>(b.k[1]);
}

int WaveletBasis::tabulation_level() const {
  return dim_ == 1 ? std::max(max_level_ + 6, 12) : std::max(max_level_ + 3, 8);
}

double WaveletBasis::evaluate(int j, std::array<int, kMaxDim> k, const Point& z, int type) const {
  BasisIndex b;
  b.level = j;
  b.k = k;
  b.type = type;
  if (j < -1 || j > max_level_) throw ArgumentError("basis level out of range");
  return evaluate(b, z);
}

double WaveletBasis::evaluate(const BasisIndex& b, const Point& z) const {
  const std::size_t f = flat(b);  // validates
  if (family_ != WaveletFamily::kHaar) {
    const int level = tabulation_level();
    return basis_function(f, level)(z);
  }
  if (b.level < 0) return 1.0;
  const double scale = std::ldexp(1.0, b.level);
  const double amp = std::sqrt(scale);
  const double t0 = scale * interior(z[0]) - b.k[0];
  if (dim_ == 1) return amp * haar_psi(t0);
  const double t1 = scale * interior(z[1]) - b.k[1];
  switch (b.type) {
    case 1:
      return scale * haar_phi(t0) * haar_psi(t1);
    case 2:
      return scale * haar_psi(t0) * haar_phi(t1);
    default:
      return scale * haar_psi(t0) * haar_psi(t1);
  }
}

std::size_t WaveletBasis::mallat_position(const BasisIndex& b, int grid_level) const {
  const std::size_t n = std::size_t{1} << grid_level;
  if (b.level < 0) return 0;
  const std::size_t m = std::size_t{1} << b.level;
  const auto k0 = static_cast<std::size_t>(b.k[0]);
  const auto k1 = static_cast<std::size_t>(b.k[1]);
  if (dim_ == 1) return m + k0;
  switch (b.type) {
    case 1:
      return k0 * n + (m + k1);
    case 2:
      return (m + k0) * n + k1;
    default:
      return (m + k0) * n + (m + k1);
  }
}

void WaveletBasis::forward(std::vector<double>& a, int grid_level) const {
  const std::size_t n = std::size_t{1} << grid_level;
  std::vector<double> scratch;
  for (std::size_t len = n; len >= 2; len /= 2) {
    if (dim_ == 1) {
      analysis_step(a.data(), 1, len, low_, high_, scratch);
    } else {
      for (std::size_t r = 0; r < len; ++r) analysis_step(a.data() + r * n, 1, len, low_, high_, scratch);
      for (std::size_t c = 0; c < len; ++c) analysis_step(a.data() + c, n, len, low_, high_, scratch);
    }
  }
}

void WaveletBasis::inverse(std::vector<double>& a, int grid_level) const {
  const std::size_t n = std::size_t{1} << grid_level;
  std::vector<double> scratch;
  for (std::size_t len = 2; len <= n; len *= 2) {
    if (dim_ == 1) {
      synthesis_step(a.data(), 1, len, low_, high_, scratch);
    } else {
      for (std::size_t c = 0; c < len; ++c) synthesis_step(a.data() + c, n, len, low_, high_, scratch);
      for (std::size_t r = 0; r < len; ++r) synthesis_step(a.data() + r * n, 1, len, low_, high_, scratch);
    }
  }
}

std::vector<double> WaveletBasis::analyze(const GridFunction& f) const {
  if (f.dim() != dim_) throw ArgumentError("analyze: dimension mismatch");
  if (f.level() <= max_level_) throw ArgumentError("analyze: grid level must exceed max_level");
  std::vector<double> a(f.values().begin(), f.values().end());
  const double scale = std::sqrt(f.cell_volume());
  for (double& v : a) v *= scale;
  forward(a, f.level());
  std::vector<double> coeffs(size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = a[mallat_position(index(i), f.level())];
  return coeffs;
}

GridFunction WaveletBasis::synthesize(std::span<const double> coeffs, int grid_level) const {
  if (coeffs.size() != size()) throw ArgumentError("synthesize: coefficient count mismatch");
  if (grid_level <= max_level_) throw ArgumentError("synthesize: grid level must exceed max_level");
  GridFunction out = GridFunction::constant(dim_, grid_level, 0.0);
  std::vector<double> a(out.size(), 0.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) a[mallat_position(index(i), grid_level)] = coeffs[i];
  inverse(a, grid_level);
  const double scale = 1.0 / std::sqrt(out.cell_volume());
  auto values = out.mutable_values();
  for (std::size_t i = 0; i < a.size(); ++i) values[i] = a[i] * scale;
  return out;
}

GridFunction WaveletBasis::basis_function(std::size_t flat_index, int grid_level) const {
  std::vector<double> coeffs(size(), 0.0);
  coeffs.at(flat_index) = 1.0;
  return synthesize(coeffs, grid_level);
}

std::vector<double> WaveletBasis::design(std::span<const Point> points) const {
  const std::size_t p = size();
  std::vector<double> out(points.size() * p);
  if (family_ == WaveletFamily::kHaar) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t c = 0; c < p; ++c) out[i * p + c] = evaluate(index(c), points[i]);
    }
    return out;
  }
  const int level = tabulation_level();
  for (std::size_t c = 0; c < p; ++c) {
    const GridFunction column = basis_function(c, level);
    for (std::size_t i = 0; i < points.size(); ++i) out[i * p + c] = column(points[i]);
  }
  return out;
}

std::vector<double> holder_coefficients(const HolderSynthesisSpec& spec) {
  if (!(spec.smoothness > 0.0)) throw ArgumentError("synthesis smoothness must be positive");
  const WaveletBasis basis(spec.family, spec.dim, spec.max_level);
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> coeffs(basis.size(), 0.0);
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    const int j = basis.index(i).level;
    const double bound = spec.amplitude * std::exp2(-j * (spec.smoothness + 0.5 * spec.dim));
    coeffs[i] = bound * unif(rng);
  }
  return coeffs;
}

GridFunction synthesize_holder(const HolderSynthesisSpec& spec) {
  const WaveletBasis basis(spec.family, spec.dim, spec.max_level);
  return basis.synthesize(holder_coefficients(spec), spec.grid_level);
}

}  // namespace bvm
