// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it is reached exclusively through the dispatch table after a
// CPUID check, so the rest of the library stays baseline x86-64.

#include <immintrin.h>

#include <cmath>

#include "bvm/kernels.hpp"

namespace bvm::kernels {
namespace {

// Lane-wise Neumaier accumulator.
struct Neumaier4 {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d t = _mm256_add_pd(s, x);
    const __m256d s_big = _mm256_cmp_pd(_mm256_and_pd(s, abs_mask),
                                        _mm256_and_pd(x, abs_mask), _CMP_GE_OQ);
    const __m256d a = _mm256_add_pd(_mm256_sub_pd(s, t), x);
    const __m256d b = _mm256_add_pd(_mm256_sub_pd(x, t), s);
    c = _mm256_add_pd(c, _mm256_blendv_pd(b, a, s_big));
    s = t;
  }
};

// Reduces lanes and tail with scalar Neumaier so the result is independent of
// lane order within rounding.
struct ScalarNeumaier {
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
};

double finish(const Neumaier4& acc, ScalarNeumaier tail) {
  alignas(32) double s[4];
  alignas(32) double c[4];
  _mm256_store_pd(s, acc.s);
  _mm256_store_pd(c, acc.c);
  for (int l = 0; l < 4; ++l) {
    tail.add(s[l]);
    tail.c += c[l];
  }
  return tail.s + tail.c;
}

inline __m256d abs_pd(__m256d x) {
  return _mm256_and_pd(x, _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL)));
}

// e^x for x in [-700, 700]. Range reduction by ln2 then a degree-13 Taylor
// polynomial on |r| <= ln2/2 (truncation < 1e-17 relative).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51

  x = _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(700.0)), _mm256_set1_pd(-700.0));
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));

  const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// log(1 + e) for e in [0, 1] via 2*atanh(s) with |s| <= 3 - 2*sqrt(2).
inline __m256d log1p_unit_pd(__m256d e) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d split = _mm256_set1_pd(0.41421356237309503);
  const __m256d high = _mm256_cmp_pd(e, split, _CMP_GT_OQ);

  const __m256d s_low = _mm256_div_pd(e, _mm256_add_pd(two, e));
  const __m256d s_high = _mm256_div_pd(_mm256_sub_pd(e, one), _mm256_add_pd(e, _mm256_set1_pd(3.0)));
  const __m256d s = _mm256_blendv_pd(s_low, s_high, high);
  const __m256d s2 = _mm256_mul_pd(s, s);

  // sum_{k=0}^{10} s^{2k} / (2k + 1)
  __m256d p = _mm256_set1_pd(1.0 / 21.0);
  for (int k = 9; k >= 0; --k) p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / (2 * k + 1)));
  const __m256d base = _mm256_and_pd(high, _mm256_set1_pd(0.6931471805599453));
  return _mm256_fmadd_pd(_mm256_mul_pd(two, s), p, base);
}

inline __m256d clamp_eta_pd(__m256d x) {
  return _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(kEtaClamp)),
                       _mm256_set1_pd(-kEtaClamp));
}

inline __m256d softplus_pd(__m256d x) {
  const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(x)));
  return _mm256_add_pd(_mm256_max_pd(x, _mm256_setzero_pd()), log1p_unit_pd(e));
}

inline __m256d logistic_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(x)));
  const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(one, e));
  const __m256d pos = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
  return _mm256_blendv_pd(_mm256_mul_pd(e, inv), inv, pos);
}

// Scalar tails reuse the vector routines on a padded lane so both paths agree.
inline double softplus_one(double x) {
  alignas(32) double out[4];
  _mm256_store_pd(out, softplus_pd(_mm256_set1_pd(x)));
  return out[0];
}

inline double logistic_one(double x) {
  alignas(32) double out[4];
  _mm256_store_pd(out, logistic_pd(_mm256_set1_pd(x)));
  return out[0];
}

double sum_avx2(const double* x, std::size_t n) {
  Neumaier4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(x + i));
  ScalarNeumaier tail;
  for (; i < n; ++i) tail.add(x[i]);
  return finish(acc, tail);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  Neumaier4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  ScalarNeumaier tail;
  for (; i < n; ++i) tail.add(x[i] * y[i]);
  return finish(acc, tail);
}

double binomial_loglik_avx2(const double* eta, const double* succ,
                            const double* trials, std::size_t n) {
  Neumaier4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d e = clamp_eta_pd(_mm256_loadu_pd(eta + i));
    const __m256d term = _mm256_fmsub_pd(_mm256_loadu_pd(succ + i), e,
                                         _mm256_mul_pd(_mm256_loadu_pd(trials + i), softplus_pd(e)));
    acc.add(term);
  }
  ScalarNeumaier tail;
  for (; i < n; ++i) {
    const double e = std::fmin(std::fmax(eta[i], -kEtaClamp), kEtaClamp);
    tail.add(succ[i] * e - trials[i] * softplus_one(e));
  }
  return finish(acc, tail);
}

double logistic_dot_avx2(const double* eta, const double* w, std::size_t n) {
  Neumaier4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(w + i), logistic_pd(_mm256_loadu_pd(eta + i))));
  }
  ScalarNeumaier tail;
  for (; i < n; ++i) tail.add(w[i] * logistic_one(eta[i]));
  return finish(acc, tail);
}

void logistic_avx2(const double* eta, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, logistic_pd(_mm256_loadu_pd(eta + i)));
  for (; i < n; ++i) out[i] = logistic_one(eta[i]);
}

void rotate_avx2(const double* x, const double* y, double c, double s,
                 double* out, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + i),
                                      _mm256_mul_pd(vs, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = c * x[i] + s * y[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; c < cols; ++c) total += row[c] * x[c];
    out[r] = total;
  }
}

constexpr KernelTable kAvx2Table{
    sum_avx2,      dot_avx2,    binomial_loglik_avx2, logistic_dot_avx2,
    logistic_avx2, rotate_avx2, gemv_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2Table; }

}  // namespace bvm::kernels
