#pragma once

#include <cstddef>
#include <string>

// Elementwise vector kernels behind prox and residual evaluation.
// Scalar reference implementations plus AVX2/NEON variants selected at
// runtime; every variant is bitwise-equivalent to the scalar reference
// (same IEEE operation per element, no reductions, no FMA).

namespace ssnkit::kernels {

enum class Backend { Auto, Scalar, Avx2, Neon };

// Selected backend after Auto resolution.
Backend active_backend();
std::string backend_name(Backend b);

// Force a backend (tests exercise Scalar vs the dispatched variant).
// Requesting an unavailable backend throws.
void set_backend(Backend b);
bool backend_available(Backend b);

// out[i] = |y[i]| > thr ? sign(y[i]) * (|y[i]| - thr) : 0
void soft_threshold(const double* y, double thr, double* out, std::size_t n);

// out[i] = y[i] > 0 ? y[i] : 0
void clamp_min0(const double* y, double* out, std::size_t n);

// out[i] = a*x[i] + b*y[i]
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n);

// out[i] = x[i] - y[i]
void sub(const double* x, const double* y, double* out, std::size_t n);

namespace detail {
struct KernelTable {
  void (*soft_threshold)(const double*, double, double*, std::size_t);
  void (*clamp_min0)(const double*, double*, std::size_t);
  void (*axpby)(double, const double*, double, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
};
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in / unsupported
const KernelTable* neon_table();
}  // namespace detail

}  // namespace ssnkit::kernels
