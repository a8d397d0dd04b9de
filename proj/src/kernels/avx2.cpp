// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatcher after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

#include "semcrra/kernels.hpp"

namespace semcrra::kernels::avx2 {
namespace {

constexpr double kLog2e = 1.4426950408889634074;
// Cody-Waite split of ln 2; the high part has enough trailing zero bits that
// n * kLn2Hi is exact for every n the range reduction produces.
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kExpOverflow = 709.782712893383973096;
constexpr double kExpUnderflow = -745.133219101941108420;
// 1.5 * 2^52: adding it to a small integral double leaves the integer in the
// low mantissa bits.
constexpr double kIntMagic = 6755399441055744.0;

// 1/k! for k = 13 down to 2.
constexpr double kExpPoly[] = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
    1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
    1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0,
};

inline __m256i pow2_bits(__m256d k) {
  const __m256d magic = _mm256_set1_pd(kIntMagic);
  __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  return _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
}

inline __m256d exp_pd(__m256d x) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  __m256d p = _mm256_set1_pd(kExpPoly[0]);
  for (std::size_t k = 1; k < std::size(kExpPoly); ++k) {
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kExpPoly[k]));
  }
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^n split in two factors so subnormal results round gradually.
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  const __m256d s1 = _mm256_castsi256_pd(pow2_bits(n1));
  const __m256d s2 = _mm256_castsi256_pd(pow2_bits(n2));
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);

  const __m256d over = _mm256_cmp_pd(x, _mm256_set1_pd(kExpOverflow), _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, _mm256_set1_pd(kExpUnderflow), _CMP_LT_OQ);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), over);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), under);
  return _mm256_blendv_pd(result, x, nan);
}

inline __m256d expm1_pd(__m256d x) {
  // Taylor series x * sum_k x^k / (k+1)! on |x| < 1/2, exp(x) - 1 elsewhere.
  __m256d p = _mm256_set1_pd(1.0 / 355687428096000.0);  // 1/17!
  constexpr double kInvFact[] = {
      1.0 / 20922789888000.0, 1.0 / 1307674368000.0, 1.0 / 87178291200.0, 1.0 / 6227020800.0,
      1.0 / 479001600.0,      1.0 / 39916800.0,      1.0 / 3628800.0,     1.0 / 362880.0,
      1.0 / 40320.0,          1.0 / 5040.0,          1.0 / 720.0,         1.0 / 120.0,
      1.0 / 24.0,             1.0 / 6.0,             1.0 / 2.0,           1.0,
  };
  for (double c : kInvFact) p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(c));
  const __m256d series = _mm256_mul_pd(p, x);
  const __m256d direct = _mm256_sub_pd(exp_pd(x), _mm256_set1_pd(1.0));
  const __m256d abs_x = _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
  const __m256d small = _mm256_cmp_pd(abs_x, _mm256_set1_pd(0.5), _CMP_LT_OQ);
  return _mm256_blendv_pd(direct, series, small);
}

}  // namespace

std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d thr = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= values.size(); i += 4) {
    const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(values.data() + i));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_GE_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < values.size(); ++i) count += std::fabs(values[i]) >= threshold ? 1 : 0;
  return count;
}

void exp_batch(std::span<const double> x, std::span<double> out) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  }
  for (; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void expm1_batch(std::span<const double> x, std::span<double> out) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i, expm1_pd(_mm256_loadu_pd(x.data() + i)));
  }
  for (; i < x.size(); ++i) out[i] = std::expm1(x[i]);
}

void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept {
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  std::size_t i = 0;
  for (; i + 4 <= exponent.size(); i += 4) {
    const __m256d arg = _mm256_mul_pd(_mm256_loadu_pd(scale.data() + i),
                                      expm1_pd(_mm256_loadu_pd(exponent.data() + i)));
    const __m256d e = exp_pd(_mm256_mul_pd(neg_half, _mm256_mul_pd(arg, arg)));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_loadu_pd(weight.data() + i), e));
  }
  for (; i < exponent.size(); ++i) {
    const double arg = scale[i] * std::expm1(exponent[i]);
    out[i] = weight[i] * std::exp(-0.5 * arg * arg);
  }
}

}  // namespace semcrra::kernels::avx2
