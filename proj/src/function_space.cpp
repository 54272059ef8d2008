#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bvm/errors.hpp"
#include "bvm/function_space.hpp"
#include "bvm/kernels.hpp"

namespace bvm {
namespace {

void check_dim_level(int dim, int level) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("dimension must be 1 or 2");
  if (level < 0 || level * dim > 28) throw ArgumentError("grid level out of range");
}

std::size_t axis_cell(double x, std::size_t cells) {
  if (!(x > 0.0)) return 0;  // also maps NaN to the first cell
  const auto i = static_cast<std::size_t>(x * static_cast<double>(cells));
  return std::min(i, cells - 1);
}

}  // namespace

GridFunction::GridFunction(int dim, int level, std::vector<double> values)
    : dim_(dim), level_(level), values_(std::move(values)) {
  check_dim_level(dim, level);
  const std::size_t expected = std::size_t{1} << (level * dim);
  if (values_.size() != expected) {
    throw ArgumentError("grid function has " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(expected));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ArgumentError("grid function values must be finite");
  }
}

GridFunction GridFunction::constant(int dim, int level, double value) {
  check_dim_level(dim, level);
  return GridFunction(dim, level, std::vector<double>(std::size_t{1} << (level * dim), value));
}

GridFunction GridFunction::sample(int dim, int level, const Function& f) {
  check_dim_level(dim, level);
  GridFunction g = constant(dim, level, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(g.cell_center(i));
  for (double v : g.values_) {
    if (!std::isfinite(v)) throw ArgumentError("sampled function is not finite");
  }
  return g;
}

double GridFunction::cell_volume() const {
  return std::ldexp(1.0, -level_ * dim_);
}

std::size_t GridFunction::cell_index(const Point& z) const {
  const std::size_t cells = cells_per_axis();
  if (dim_ == 1) return axis_cell(z[0], cells);
  return axis_cell(z[0], cells) * cells + axis_cell(z[1], cells);
}

Point GridFunction::cell_center(std::size_t index) const {
  const std::size_t cells = cells_per_axis();
  const double h = 1.0 / static_cast<double>(cells);
  if (dim_ == 1) return point1((static_cast<double>(index) + 0.5) * h);
  return point2((static_cast<double>(index / cells) + 0.5) * h,
                (static_cast<double>(index % cells) + 0.5) * h);
}

Function GridFunction::as_function() const {
  return [g = *this](const Point& z) { return g(z); };
}

void GridFunction::write_csv(std::ostream& out) const {
  out << "level," << level_ << ",dim," << dim_ << '\n';
  out.precision(17);
  for (double v : values_) out << v << '\n';
}

GridFunction GridFunction::read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ArgumentError("grid CSV: missing header");
  int level = -1;
  int dim = -1;
  if (std::sscanf(header.c_str(), "level,%d,dim,%d", &level, &dim) != 2) {
    throw ArgumentError("grid CSV: malformed header '" + header + "'");
  }
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  return GridFunction(dim, level, std::move(values));
}

void GridFunction::write_binary(std::ostream& out) const {
  static_assert(std::endian::native == std::endian::little, "binary grid format is little-endian");
  const std::int32_t dim = dim_;
  const std::int32_t level = level_;
  const std::uint64_t count = values_.size();
  out.write("BVMG", 4);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&level), sizeof level);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

GridFunction GridFunction::read_binary(std::istream& in) {
  char magic[4];
  std::int32_t dim = 0;
  std::int32_t level = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BVMG", 4) != 0) throw ArgumentError("grid binary: bad magic");
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&level), sizeof level);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || count > (std::uint64_t{1} << 28)) throw ArgumentError("grid binary: bad header");
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ArgumentError("grid binary: truncated data");
  return GridFunction(dim, level, std::move(values));
}

double quadrature(const GridFunction& f) {
  return kernels::sum(f.values()) * f.cell_volume();
}

double quadrature(const GridFunction& f, const GridFunction& weight) {
  if (f.dim() != weight.dim() || f.level() != weight.level()) {
    throw ArgumentError("quadrature: function and weight grids differ");
  }
  for (double w : weight.values()) {
    if (w < 0.0) throw ArgumentError("quadrature: weight must be nonnegative");
  }
  const double mass = quadrature(weight);
  if (std::fabs(mass - 1.0) > 1e-8) {
    throw ArgumentError("quadrature: weight integrates to " + std::to_string(mass) + ", not 1");
  }
  return kernels::dot(f.values(), weight.values()) * f.cell_volume();
}

double quadrature(const Function& f, int dim, int level) {
  return quadrature(GridFunction::sample(dim, level, f));
}

double quadrature(const Function& f, const GridFunction& weight) {
  return quadrature(GridFunction::sample(weight.dim(), weight.level(), f), weight);
}

}  // namespace bvm
