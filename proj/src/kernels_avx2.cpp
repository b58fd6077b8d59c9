#include "ssnkit/kernels.hpp"

#if defined(__AVX2__) && (defined(__x86_64__) || defined(__i386__))
#define SSNKIT_AVX2_BUILT 1
#include <immintrin.h>
#else
#define SSNKIT_AVX2_BUILT 0
#endif

namespace ssnkit::kernels::detail {

#if SSNKIT_AVX2_BUILT

namespace {

// The lane arithmetic mirrors the scalar reference exactly:
//   a = |y| - thr; out = a > 0 ? copysign(a, y) : 0
// copysign(a, y) for a > 0 is (a | signbit(y)); the inactive lanes are
// zeroed through the compare mask, so the 0 case carries sign +0 as the
// scalar ternary does.
void soft_threshold_avx2(const double* y, double thr, double* out, std::size_t n) {
  const __m256d vthr = _mm256_set1_pd(thr);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(y + i);
    const __m256d av = _mm256_andnot_pd(sign_mask, v);
    const __m256d a = _mm256_sub_pd(av, vthr);
    const __m256d active = _mm256_cmp_pd(a, zero, _CMP_GT_OQ);
    const __m256d signed_a = _mm256_or_pd(a, _mm256_and_pd(sign_mask, v));
    _mm256_storeu_pd(out + i, _mm256_and_pd(active, signed_a));
  }
  for (; i < n; ++i) {
    const double a = __builtin_fabs(y[i]) - thr;
    out[i] = a > 0.0 ? __builtin_copysign(a, y[i]) : 0.0;
  }
}

void clamp_min0_avx2(const double* y, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(y + i);
    const __m256d active = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(active, v));
  }
  for (; i < n; ++i) out[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out,
                std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // mul + mul + add, no FMA: keeps rounding identical to the scalar loop
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void sub_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable t{soft_threshold_avx2, clamp_min0_avx2, axpby_avx2, sub_avx2};
  static const bool ok = cpu_has_avx2();
  return ok ? &t : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace ssnkit::kernels::detail
