#include "ssnkit/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#define SSNKIT_NEON_BUILT 1
#include <arm_neon.h>
#else
#define SSNKIT_NEON_BUILT 0
#endif

namespace ssnkit::kernels::detail {

#if SSNKIT_NEON_BUILT

namespace {

// Same lane semantics as the scalar reference; compares + bit ops instead of
// vmax so the signed-zero behaviour matches the ternaries exactly.
void soft_threshold_neon(const double* y, double thr, double* out, std::size_t n) {
  const float64x2_t vthr = vdupq_n_f64(thr);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const uint64x2_t sign_mask = vdupq_n_u64(0x8000000000000000ULL);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(y + i);
    const float64x2_t a = vsubq_f64(vabsq_f64(v), vthr);
    const uint64x2_t active = vcgtq_f64(a, zero);
    const uint64x2_t signed_a =
        vorrq_u64(vreinterpretq_u64_f64(a), vandq_u64(vreinterpretq_u64_f64(v), sign_mask));
    vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(active, signed_a)));
  }
  for (; i < n; ++i) {
    const double a = __builtin_fabs(y[i]) - thr;
    out[i] = a > 0.0 ? __builtin_copysign(a, y[i]) : 0.0;
  }
}

void clamp_min0_neon(const double* y, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(y + i);
    const uint64x2_t active = vcgtq_f64(v, zero);
    vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(active, vreinterpretq_u64_f64(v))));
  }
  for (; i < n; ++i) out[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void axpby_neon(double a, const double* x, double b, const double* y, double* out,
                std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    const float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(out + i, vaddq_f64(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void sub_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable t{soft_threshold_neon, clamp_min0_neon, axpby_neon, sub_neon};
  return &t;
}

#else

const KernelTable* neon_table() { return nullptr; }

#endif

}  // namespace ssnkit::kernels::detail
