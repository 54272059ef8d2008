#pragma once

// Functions on [0,1]^d (d = 1, 2): dyadic cell-centred grids, midpoint
// quadrature, compactly supported wavelet bases and Hölder-class synthesis.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bvm {

inline constexpr int kMaxDim = 2;

// A covariate value. Only the first `dim` coordinates are meaningful.
using Point = std::array<double, kMaxDim>;

inline Point point1(double x) { return Point{x, 0.0}; }
inline Point point2(double x, double y) { return Point{x, y}; }

using Function = std::function<double(const Point&)>;

// Values on the cell centres of the dyadic grid with 2^level cells per axis.
// Off-grid evaluation is nearest-cell (piecewise constant).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int dim, int level, std::vector<double> values);

  static GridFunction constant(int dim, int level, double value);
  static GridFunction sample(int dim, int level, const Function& f);

  int dim() const { return dim_; }
  int level() const { return level_; }
  std::size_t size() const { return values_.size(); }
  std::size_t cells_per_axis() const { return std::size_t{1} << level_; }
  double cell_volume() const;

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::size_t cell_index(const Point& z) const;
  Point cell_center(std::size_t index) const;
  double operator()(const Point& z) const { return values_[cell_index(z)]; }

  // Nearest-cell evaluation wrapped as a Function (copies the values).
  Function as_function() const;

  // Serialization: CSV is a header line "level,<L>,dim,<d>" followed by one
  // value per line; binary is "BVMG", int32 dim, int32 level, uint64 count,
  // then little-endian doubles.
  void write_csv(std::ostream& out) const;
  static GridFunction read_csv(std::istream& in);
  void write_binary(std::ostream& out) const;
  static GridFunction read_binary(std::istream& in);

 private:
  int dim_ = 1;
  int level_ = 0;
  std::vector<double> values_;
};

// Midpoint rule on the function's own grid.
double quadrature(const GridFunction& f);
// Midpoint rule of f * weight; the weight must be nonnegative and integrate
// to 1 within 1e-8 (ArgumentError otherwise). Grids must match.
double quadrature(const GridFunction& f, const GridFunction& weight);
// Midpoint rule of a callable on the dyadic grid of the given level.
double quadrature(const Function& f, int dim, int level);
double quadrature(const Function& f, const GridFunction& weight);

enum class WaveletFamily { kHaar, kDaubechies4 };

std::string to_string(WaveletFamily family);
WaveletFamily wavelet_family_from_string(const std::string& name);

// Identifies one basis function. level == -1 is the scaling (constant)
// function. type is 0 in d = 1 and 1..3 in d = 2:
//   1: phi(x0) psi(x1), 2: psi(x0) phi(x1), 3: psi(x0) psi(x1).
struct BasisIndex {
  int level = -1;
  int type = 0;
  std::array<int, kMaxDim> k{0, 0};
  bool operator==(const BasisIndex&) const = default;
};

// Orthonormal wavelet basis of L2([0,1]^d) truncated at max_level:
// psi_{jk}(z) = 2^{jd/2} psi(2^j z - k), j = 0..max_level, plus the scaling
// function. Coefficients are laid out flat: scaling first, then level by
// level, type by type, k row-major. Daubechies-4 is the periodized discrete
// wavelet on the working grid.
class WaveletBasis {
 public:
  WaveletBasis(WaveletFamily family, int dim, int max_level);

  WaveletFamily family() const { return family_; }
  int dim() const { return dim_; }
  int max_level() const { return max_level_; }

  std::size_t size() const { return level_offset(max_level_ + 1); }
  // Number of basis functions at level j (types included).
  std::size_t level_size(int j) const;
  // Flat position of the first function of level j (j = -1 gives 0).
  std::size_t level_offset(int j) const;
  int types() const { return dim_ == 1 ? 1 : 3; }

  BasisIndex index(std::size_t flat) const;
  std::size_t flat(const BasisIndex& b) const;

  // psi_{jk}(z); ArgumentError if j or k is out of range. For Haar this is
  // the closed form; Daubechies-4 is tabulated at `tabulation_level()`.
  double evaluate(int j, std::array<int, kMaxDim> k, const Point& z, int type = 0) const;
  double evaluate(const BasisIndex& b, const Point& z) const;

  // Coefficients <f, psi> for every basis function up to max_level.
  // Requires f.level() > max_level.
  std::vector<double> analyze(const GridFunction& f) const;
  // sum of coeffs[i] * psi_i on the grid of the given level (> max_level).
  GridFunction synthesize(std::span<const double> coeffs, int grid_level) const;
  GridFunction basis_function(std::size_t flat, int grid_level) const;

  // Row-major points x size() matrix of basis values.
  std::vector<double> design(std::span<const Point> points) const;

  int tabulation_level() const;

 private:
  void forward(std::vector<double>& a, int grid_level) const;
  void inverse(std::vector<double>& a, int grid_level) const;
  std::size_t mallat_position(const BasisIndex& b, int grid_level) const;

  WaveletFamily family_;
  int dim_;
  int max_level_;
  std::vector<double> low_;
  std::vector<double> high_;
};

struct HolderSynthesisSpec {
  double smoothness = 1.0;
  std::uint64_t seed = 1;
  double amplitude = 1.0;
  WaveletFamily family = WaveletFamily::kHaar;
  int dim = 1;
  int max_level = 10;
  int grid_level = 12;
};

// Coefficients c_{jk} = amplitude * 2^{-j(s + d/2)} * u_{jk}, u_{jk} iid
// Uniform[-1,1] from the seeded stream in flat order; scaling coefficient 0.
std::vector<double> holder_coefficients(const HolderSynthesisSpec& spec);
GridFunction synthesize_holder(const HolderSynthesisSpec& spec);

}  // namespace bvm
