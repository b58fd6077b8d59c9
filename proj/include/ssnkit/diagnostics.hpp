#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssnkit/manifold.hpp"
#include "ssnkit/residuals.hpp"

namespace ssnkit {

struct DiagnosticsConfig {
  double support_tol = 1e-7;      // |x_i| > support_tol  => i in T1
  double sc_tol = 1e-6;           // | |grad_i| - lambda | <= sc_tol => i in T2; also the SC margin
  double pd_tol = 1e-10;          // positive-definiteness / nonsingularity margin
  double boundary_tol = kBoundaryTol;
  int enum_cap = kEnumCap;
  double stationarity_tol = 1e-8;
  double root_tol = 1e-10;        // "x* is a root" preconditions
};

// T1 = {i : |x_i| > support_tol}, T2 = {i : |x_i| <= support_tol,
// ||grad_i| - lambda| <= sc_tol}, S = T1 u T2 (disjoint union).
struct SupportInfo {
  std::vector<Index> t1, t2, s;
};
SupportInfo support_info(const Vec& x, const Vec& grad, double lambda,
                         const DiagnosticsConfig& cfg = {});

enum class Verdict { True, False, Undetermined };
std::string verdict_name(Verdict v);

struct BdRegularity {
  Verdict verdict = Verdict::Undetermined;
  double margin = 0.0;      // lambda_min of the certified submatrix, or min sigma_min
  int elements_tested = 0;  // enumeration path
  std::string method;       // "pgm-support" or "enumerate"
};

// Closed-form path for PGM systems with L1 h: BD-regularity holds iff
// [hessian]_TT is positive definite with T = T1 u T2. Other h fall back to
// enumeration.
BdRegularity bd_regularity_pgm(const ResidualSystem& system, const Vec& x,
                               const DiagnosticsConfig& cfg = {});

// Brute force over every element of the B-Jacobian at x; verdict is
// Undetermined when the number of tie decisions exceeds enum_cap.
BdRegularity bd_regularity_enumerate(const ResidualSystem& system, const Vec& x,
                                     const DiagnosticsConfig& cfg = {});

struct ScResult {
  bool holds = false;
  double gap = 0.0;  // distance of 0 to the relative boundary; +inf convention for ZeroFn
};

// Strict complementarity at a (near-)stationary point. For PGM/ALM the point
// is x*; for DRS it is z* (x* = prox_th(z*), dual recovered as
// y* = A(x* - z*)/t for the affine case). Throws std::domain_error when the
// residual at the point exceeds cfg.stationarity_tol.
ScResult sc_check(const ResidualSystem& system, const Vec& point,
                  const DiagnosticsConfig& cfg = {});

// sigma_min(J P + mu I) - mu with mu = ||F(x)||; nonnegative means the
// shifted-Jacobian invertibility assumption holds at x. Throws
// std::domain_error at an exact root (mu = 0).
double invertibility_margin(const ResidualSystem& system, const Vec& x, const Mat& p,
                            TieRule rule = TieRule::ZeroOnBoundary,
                            double boundary_tol = kBoundaryTol);

using DistanceOracle = std::function<double(const Vec&)>;
using ProjectionOracle = std::function<Vec(const Vec&)>;

struct ErrorBound {
  double gamma_hat = 0.0;      // min ||F(x)|| / dist(x, X* ∩ M) over samples
  double lipschitz_hat = 0.0;  // max ||F(y)-F(x)||/||y-x|| over sampled pairs
  int samples_used = 0;
};

// Samples the ball B(x*, radius) (intersected with the manifold when given),
// rating ||F|| against the instance-supplied distance oracle. When a
// projection oracle is supplied, the pairs (x, proj(x)) enter the Lipschitz
// estimate, which makes gamma_hat <= lipschitz_hat structural.
ErrorBound error_bound_estimate(const ResidualSystem& system, const Vec& xstar,
                                const DistanceOracle& distance, double radius, int samples,
                                std::uint64_t seed,
                                const SupportManifold* manifold = nullptr,
                                const ProjectionOracle* projection = nullptr,
                                const DiagnosticsConfig& cfg = {});

// gamma_hat over nested radii from one master sample pool (monotone
// nonincreasing by construction). radii must be sorted increasing.
std::vector<double> error_bound_profile(const ResidualSystem& system, const Vec& xstar,
                                        const DistanceOracle& distance,
                                        const std::vector<double>& radii, int samples,
                                        std::uint64_t seed,
                                        const SupportManifold* manifold = nullptr,
                                        const DiagnosticsConfig& cfg = {});

// Max pairwise Frobenius deviation of B-Jacobian elements sampled in
// B(x*, radius) (on the manifold when given). Samples include x*, the axis
// points x* +- radius e_i, and seeded random points. ~0 certifies local
// constancy of the Jacobian.
double smoothness_probe(const ResidualSystem& system, const Vec& xstar, double radius,
                        int samples, std::uint64_t seed,
                        const SupportManifold* manifold = nullptr,
                        TieRule rule = TieRule::ZeroOnBoundary,
                        const DiagnosticsConfig& cfg = {});

struct DiagnosticsReport {
  double residual_norm = 0.0;
  bool stationary = false;
  BdRegularity bd;
  bool sc_holds = false;
  double sc_gap = 0.0;
  bool sc_evaluated = false;
  double invertibility = 0.0;  // NaN at an exact root
  double smoothness_deviation = 0.0;
  double smoothness_radius = 0.0;
  bool smoothness_evaluated = false;
  double gamma_hat = 0.0;  // NaN without a distance oracle
  double lipschitz_hat = 0.0;
  DiagnosticsConfig cfg;  // tolerances embedded in the serialized report
};

// Runs the verdict battery at a candidate point. Never throws on a
// non-stationary candidate: the report carries `stationary = false` and
// skips the checks whose preconditions fail.
DiagnosticsReport diagnose(const ResidualSystem& system, const Vec& point,
                           const DiagnosticsConfig& cfg = {});

}  // namespace ssnkit
