#include <algorithm>
#include <cmath>

#include "bvm/kernels.hpp"

namespace bvm::kernels {
namespace {

struct Neumaier {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  double value() const { return s + c; }
};

inline double clamp_eta(double x) {
  return std::clamp(x, -kEtaClamp, kEtaClamp);
}

// log(1 + e^x), stable for both signs.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double logistic_one(double x) {
  const double e = std::exp(-std::fabs(x));
  return x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double sum_scalar(const double* x, std::size_t n) {
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
  return acc.value();
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i] * y[i]);
  return acc.value();
}

double binomial_loglik_scalar(const double* eta, const double* succ,
                              const double* trials, std::size_t n) {
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = clamp_eta(eta[i]);
    acc.add(succ[i] * e - trials[i] * softplus(e));
  }
  return acc.value();
}

double logistic_dot_scalar(const double* eta, const double* w, std::size_t n) {
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * logistic_one(eta[i]));
  return acc.value();
}

void logistic_scalar(const double* eta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = logistic_one(eta[i]);
}

void rotate_scalar(const double* x, const double* y, double c, double s,
                   double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * x[i] + s * y[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

constexpr KernelTable kScalarTable{
    sum_scalar,      dot_scalar,    binomial_loglik_scalar, logistic_dot_scalar,
    logistic_scalar, rotate_scalar, gemv_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

}  // namespace bvm::kernels
