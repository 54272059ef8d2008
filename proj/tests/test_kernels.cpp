#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bvm/kernels.hpp"

namespace k = bvm::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

const k::KernelTable* simd() {
  if (k::avx2_table() == nullptr || !k::cpu_supports_avx2()) return nullptr;
  return k::avx2_table();
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelEquivalence, SumAndDot) {
  const auto* v = simd();
  if (v == nullptr) GTEST_SKIP() << "no AVX2";
  const std::size_t n = GetParam();
  const auto x = random_vec(n, -1e3, 1e3, 1);
  const auto y = random_vec(n, -2.0, 2.0, 2);
  const auto& s = k::scalar_table();
  EXPECT_NEAR(v->sum(x.data(), n), s.sum(x.data(), n), 1e-10 * (1.0 + n));
  EXPECT_NEAR(v->dot(x.data(), y.data(), n), s.dot(x.data(), y.data(), n), 1e-10 * (1.0 + n));
}

TEST_P(KernelEquivalence, BinomialLoglik) {
  const auto* v = simd();
  if (v == nullptr) GTEST_SKIP() << "no AVX2";
  const std::size_t n = GetParam();
  auto eta = random_vec(n, -40.0, 40.0, 3);
  if (n > 2) {
    eta[0] = 0.0;
    eta[1] = 1e300;
    eta[2] = -1e300;
  }
  std::vector<double> trials(n), succ(n);
  std::mt19937_64 rng(4);
  for (std::size_t i = 0; i < n; ++i) {
    trials[i] = static_cast<double>(rng() % 20);
    succ[i] = trials[i] > 0 ? static_cast<double>(rng() % static_cast<unsigned>(trials[i] + 1)) : 0.0;
  }
  const auto& s = k::scalar_table();
  const double a = s.binomial_loglik(eta.data(), succ.data(), trials.data(), n);
  const double b = v->binomial_loglik(eta.data(), succ.data(), trials.data(), n);
  EXPECT_NEAR(a, b, 1e-11 * (1.0 + std::fabs(a)));
}

TEST_P(KernelEquivalence, LogisticAndLogisticDot) {
  const auto* v = simd();
  if (v == nullptr) GTEST_SKIP() << "no AVX2";
  const std::size_t n = GetParam();
  const auto eta = random_vec(n, -50.0, 50.0, 5);
  const auto w = random_vec(n, 0.0, 1.0, 6);
  std::vector<double> a(n), b(n);
  k::scalar_table().logistic(eta.data(), a.data(), n);
  v->logistic(eta.data(), b.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-14) << "i=" << i << " eta=" << eta[i];
  EXPECT_NEAR(k::scalar_table().logistic_dot(eta.data(), w.data(), n), v->logistic_dot(eta.data(), w.data(), n),
              1e-12 * (1.0 + n));
}

TEST_P(KernelEquivalence, RotateAndGemv) {
  const auto* v = simd();
  if (v == nullptr) GTEST_SKIP() << "no AVX2";
  const std::size_t n = GetParam();
  const auto x = random_vec(n, -3.0, 3.0, 7);
  const auto y = random_vec(n, -3.0, 3.0, 8);
  std::vector<double> a(n), b(n);
  k::scalar_table().rotate(x.data(), y.data(), 0.6, -0.8, a.data(), n);
  v->rotate(x.data(), y.data(), 0.6, -0.8, b.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);

  const std::size_t rows = 7;
  const auto m = random_vec(rows * n, -1.0, 1.0, 9);
  std::vector<double> ga(rows), gb(rows);
  k::scalar_table().gemv(m.data(), rows, n, x.data(), ga.data());
  v->gemv(m.data(), rows, n, x.data(), gb.data());
  for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(ga[r], gb[r], 1e-12 * (1.0 + n));
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence,
                         ::testing::Values(0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 1023, 4097));

TEST(Kernels, ScalarReferenceValues) {
  const auto& s = k::scalar_table();
  const double eta[] = {0.0};
  const double one[] = {1.0};
  const double two[] = {2.0};
  EXPECT_NEAR(s.binomial_loglik(eta, one, two, 1), 2.0 * std::log(0.5), 1e-15);
  double out[1];
  s.logistic(eta, out, 1);
  EXPECT_EQ(out[0], 0.5);
}

TEST(Kernels, ClampMatchesProbabilityClip) {
  // logit(1 - 1e-12)
  EXPECT_NEAR(k::kEtaClamp, std::log(1.0 - 1e-12) - std::log(1e-12), 1e-9);
  const auto& s = k::scalar_table();
  const double big[] = {1e6};
  const double succ[] = {0.0};
  const double trials[] = {1.0};
  EXPECT_NEAR(s.binomial_loglik(big, succ, trials, 1), std::log(1e-12), 1e-6);
}

TEST(Kernels, CompensatedSumIsExactOnCancellation) {
  std::vector<double> x = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(k::scalar_table().sum(x.data(), x.size()), 2.0);
  if (const auto* v = simd()) EXPECT_EQ(v->sum(x.data(), x.size()), 2.0);
}

TEST(Kernels, DispatchCanBeForced) {
  const k::Isa before = k::active_isa();
  k::set_isa(k::Isa::kScalar);
  EXPECT_EQ(k::active_isa(), k::Isa::kScalar);
  EXPECT_EQ(k::isa_name(k::active_isa()), "scalar");
  if (simd() != nullptr) {
    k::set_isa(k::Isa::kAvx2);
    EXPECT_EQ(k::active_isa(), k::Isa::kAvx2);
  } else {
    EXPECT_THROW(k::set_isa(k::Isa::kAvx2), std::runtime_error);
  }
  k::set_isa(before);
}

TEST(Kernels, SpanWrappersCheckLengths) {
  std::vector<double> a(3), b(4);
  EXPECT_THROW(k::dot(a, b), std::invalid_argument);
  EXPECT_THROW(k::rotate(a, a, 1.0, 0.0, b), std::invalid_argument);
  EXPECT_THROW(k::gemv(a, 2, 2, b, a), std::invalid_argument);
}

}  // namespace
