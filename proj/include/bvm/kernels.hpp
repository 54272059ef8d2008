#pragma once

// Data-parallel inner loops used by the samplers and the quadrature code.
//
// Every kernel exists as a portable scalar reference and, on x86-64, as an
// AVX2+FMA variant. The variant is picked once at startup from CPUID and can
// be overridden with BVM_ISA=scalar|avx2 or set_isa(). The two variants agree
// to rounding (see tests/test_kernels.cpp); nothing downstream depends on
// which one ran beyond the last few ulps.

#include <cstddef>
#include <span>
#include <string_view>

namespace bvm::kernels {

enum class Isa { kScalar, kAvx2 };

// Logits are clamped to +-logit(1 - 1e-12) before any log is taken, which is
// the same as clipping the probability to [1e-12, 1 - 1e-12].
inline constexpr double kEtaClamp = 27.631021115928547;

struct KernelTable {
  // Compensated (Neumaier) sum.
  double (*sum)(const double* x, std::size_t n);
  // Compensated dot product.
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i succ_i * log Psi(eta_i) + (trials_i - succ_i) * log(1 - Psi(eta_i))
  double (*binomial_loglik)(const double* eta, const double* succ,
                            const double* trials, std::size_t n);
  // sum_i w_i * Psi(eta_i)
  double (*logistic_dot)(const double* eta, const double* w, std::size_t n);
  // out_i = Psi(eta_i)
  void (*logistic)(const double* eta, double* out, std::size_t n);
  // out_i = c * x_i + s * y_i
  void (*rotate)(const double* x, const double* y, double c, double s,
                 double* out, std::size_t n);
  // out = A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* out);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without the AVX2 translation unit.
const KernelTable* avx2_table();

bool cpu_supports_avx2();
Isa active_isa();
// Throws std::runtime_error if the requested ISA is not usable here.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);
const KernelTable& active();

inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}
double dot(std::span<const double> x, std::span<const double> y);
double binomial_loglik(std::span<const double> eta, std::span<const double> succ,
                       std::span<const double> trials);
double logistic_dot(std::span<const double> eta, std::span<const double> w);
void logistic(std::span<const double> eta, std::span<double> out);
void rotate(std::span<const double> x, std::span<const double> y, double c,
            double s, std::span<double> out);
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out);

}  // namespace bvm::kernels
