#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssnkit/manifold.hpp"
#include "ssnkit/residuals.hpp"

namespace ssnkit {

enum class LinearSolverKind { Direct, Iterative };
enum class GlobalizationKind { None, ResidualDecrease };
enum class StepKind { Newton, Fallback, None };
enum class TerminalStatus { Converged, MaxIters, LinearSolveFailure };

struct SolverConfig {
  int max_iters = 100;
  double tol_residual = 1e-12;
  // Inexactness rule for the linear solve: ||r_k|| <= L3 * mu_k * ||F_k||^q.
  double inexact_l3 = 1.0;
  double inexact_q = 2.0;  // must lie in (1, 2]
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
  GlobalizationKind globalization = GlobalizationKind::ResidualDecrease;
  double nu = 0.9;  // residual-decrease factor, in (0, 1)
  TieRule tie_rule = TieRule::ZeroOnBoundary;
  double boundary_tol = kBoundaryTol;
  std::uint64_t seed = 0;
  bool store_iterates = false;

  void validate() const;  // throws naming the violated constraint
};

// Row k describes iterate x_k and the step taken from it. For Newton rows
// dnorm is the computed direction norm ||d_k|| and rnorm the linear-solve
// residual; for fallback rows dnorm is the norm of the step actually taken
// (rnorm still reports the rejected Newton attempt). The terminal row has
// step kind None. mu always equals res_f of the same row.
struct IterRow {
  int k = 0;
  double res_f = 0.0;
  double mu = 0.0;
  double dnorm = 0.0;
  double rnorm = 0.0;
  StepKind step = StepKind::None;
  double time_ms = 0.0;
  std::optional<Vec> x;
};

struct SolveTrace {
  std::vector<IterRow> rows;
  TerminalStatus status = TerminalStatus::MaxIters;
  Vec x_final;
  bool x0_projected = false;  // warning: x0 was not on the manifold

  double final_residual() const { return rows.empty() ? 0.0 : rows.back().res_f; }
  int iterations() const { return static_cast<int>(rows.size()) - 1; }
  std::vector<double> residual_history() const;
};

// Regularized inexact semismooth Newton with shift mu_k = ||F_k||:
//   (J_k + mu_k I) d = -F_k + r_k,   x_{k+1} = x_k + d_k,
// with an optional proximal-gradient (PGM/ALM) or DRS fallback when the
// Newton step fails the residual-decrease test.
SolveTrace ssn_solve(const ResidualSystem& system, const Vec& x0, const SolverConfig& cfg);

// Projected variant on a fixed-support manifold:
//   (J_k P_k + mu_k I) d_k = -F(x_k) + r_k,   x_{k+1} = P_M(x_k + d_k).
// With the full support set this reproduces ssn_solve bitwise.
SolveTrace projected_ssn_solve(const ResidualSystem& system, const SupportManifold& manifold,
                               const Vec& x0, const SolverConfig& cfg);

// Empirical convergence-order probe over the residual history. The
// qualifying tail is the maximal contiguous suffix with ||F_k|| inside
// (1e-14, 1e-2); q_hat is the median of log||F_{k+1}||/log||F_k|| over the
// tail, and superlinear requires the last (up to three) tail ratios
// ||F_{k+1}||/||F_k|| to be strictly decreasing with the final one < 0.1.
// Traces with fewer than 4 iterations or fewer than 2 tail points are
// reported undetermined.
struct RateEstimate {
  double q_hat = 0.0;
  bool superlinear = false;
  bool undetermined = true;
};

RateEstimate rate_estimate(const std::vector<double>& residual_history);
RateEstimate rate_estimate(const SolveTrace& trace);

// First-order warm start: iterate the system's fixed-point step (PGM step,
// DRS shadow update, ALM subproblem gradient step) from x0, stopping after
// max_steps or once ||F|| <= target_res.
Vec warm_start_first_order(const ResidualSystem& system, Vec x0, int max_steps,
                           double target_res);

}  // namespace ssnkit
