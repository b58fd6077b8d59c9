#pragma once

// Independent numerical oracles for the test suites. These deliberately do
// not reuse the library's prox/Jacobian code paths: candidate enumeration,
// bisection on the radial problem, SVD pseudoinverse projection, central
// finite differences, and exact sign-pattern enumeration for small Lasso
// instances.

#include <functional>
#include <optional>

#include "ssnkit/common.hpp"

namespace ssnkit::testing {

Vec oracle_prox_l1(double lambda, double t, const Vec& y);
Vec oracle_prox_nonneg(double t, const Vec& y);
Vec oracle_prox_l2(double t, const Vec& y);
Vec oracle_prox_affine(const Mat& a, const Vec& b, const Vec& y);

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h);
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);

// Exact stationary point of 0.5||Ax-b||^2 + c^T x + lambda ||x||_1 by
// enumerating all 3^n sign patterns. n must be small.
std::optional<Vec> lasso_enumerate_solution(const Mat& a, const Vec& b, const Vec& c,
                                            double lambda);

// Distance of x to the duplicate-pair solution segment by golden-section
// search over the segment parameter (cross-check for the closed form).
double segment_distance_golden(const Vec& x, const Vec& base, Index i1, Index i2);

}  // namespace ssnkit::testing
