#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bvm/kernels.hpp"

namespace bvm::kernels {

#ifndef BVM_WITH_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(BVM_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa initial_isa() {
  const char* env = std::getenv("BVM_ISA");
  if (env != nullptr && std::string(env) == "scalar") return Isa::kScalar;
  return (avx2_table() != nullptr && cpu_supports_avx2()) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && (avx2_table() == nullptr || !cpu_supports_avx2())) {
    throw std::runtime_error("AVX2 kernels are not available on this machine");
  }
  isa_slot().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

const KernelTable& active() {
  return active_isa() == Isa::kAvx2 ? *avx2_table() : scalar_table();
}

namespace {
void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("kernel length mismatch: ") + what);
}
}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size(), "dot");
  return active().dot(x.data(), y.data(), x.size());
}

double binomial_loglik(std::span<const double> eta, std::span<const double> succ,
                       std::span<const double> trials) {
  require_same(eta.size(), succ.size(), "binomial_loglik");
  require_same(eta.size(), trials.size(), "binomial_loglik");
  return active().binomial_loglik(eta.data(), succ.data(), trials.data(), eta.size());
}

double logistic_dot(std::span<const double> eta, std::span<const double> w) {
  require_same(eta.size(), w.size(), "logistic_dot");
  return active().logistic_dot(eta.data(), w.data(), eta.size());
}

void logistic(std::span<const double> eta, std::span<double> out) {
  require_same(eta.size(), out.size(), "logistic");
  active().logistic(eta.data(), out.data(), eta.size());
}

void rotate(std::span<const double> x, std::span<const double> y, double c,
            double s, std::span<double> out) {
  require_same(x.size(), y.size(), "rotate");
  require_same(x.size(), out.size(), "rotate");
  active().rotate(x.data(), y.data(), c, s, out.data(), x.size());
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) {
  require_same(a.size(), rows * cols, "gemv matrix");
  require_same(x.size(), cols, "gemv vector");
  require_same(out.size(), rows, "gemv output");
  active().gemv(a.data(), rows, cols, x.data(), out.data());
}

}  // namespace bvm::kernels
