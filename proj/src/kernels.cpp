#include "ssnkit/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ssnkit::kernels {

namespace detail {

namespace {

void soft_threshold_scalar(const double* y, double thr, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(y[i]) - thr;
    out[i] = a > 0.0 ? std::copysign(a, y[i]) : 0.0;
  }
}

void clamp_min0_scalar(const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] > 0.0 ? y[i] : 0.0;
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{soft_threshold_scalar, clamp_min0_scalar, axpby_scalar, sub_scalar};
  return t;
}

}  // namespace detail

namespace {

const detail::KernelTable* resolve(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &detail::scalar_table();
    case Backend::Avx2:
      return detail::avx2_table();
    case Backend::Neon:
      return detail::neon_table();
    case Backend::Auto:
      if (const auto* t = detail::avx2_table()) return t;
      if (const auto* t = detail::neon_table()) return t;
      return &detail::scalar_table();
  }
  return &detail::scalar_table();
}

struct Dispatch {
  const detail::KernelTable* table;
  Backend which;
};

Dispatch& dispatch() {
  static Dispatch d = [] {
    Dispatch r{resolve(Backend::Auto), Backend::Scalar};
    if (r.table == detail::avx2_table()) r.which = Backend::Avx2;
    else if (r.table == detail::neon_table() && r.table) r.which = Backend::Neon;
    return r;
  }();
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().which; }

bool backend_available(Backend b) { return resolve(b) != nullptr; }

void set_backend(Backend b) {
  const detail::KernelTable* t = resolve(b);
  if (!t) throw std::runtime_error("kernel backend not available: " + backend_name(b));
  dispatch().table = t;
  dispatch().which = (b == Backend::Auto) ? (t == detail::avx2_table() ? Backend::Avx2
                                             : t == detail::neon_table() ? Backend::Neon
                                                                         : Backend::Scalar)
                                          : b;
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

void soft_threshold(const double* y, double thr, double* out, std::size_t n) {
  dispatch().table->soft_threshold(y, thr, out, n);
}
void clamp_min0(const double* y, double* out, std::size_t n) {
  dispatch().table->clamp_min0(y, out, n);
}
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  dispatch().table->axpby(a, x, b, y, out, n);
}
void sub(const double* x, const double* y, double* out, std::size_t n) {
  dispatch().table->sub(x, y, out, n);
}

}  // namespace ssnkit::kernels
