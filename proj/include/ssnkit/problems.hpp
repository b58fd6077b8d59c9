#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ssnkit/residuals.hpp"

namespace ssnkit {

// Distance/projection oracle for the solution segment of a duplicated-column
// instance: solutions differ from a base solution only in coordinates
// (i1, i2), on {(a, b) : a + b = coord_sum, |a| + |b| = abs_sum}.
struct SegmentOracle {
  Index i1 = -1, i2 = -1;
  double coord_sum = 0.0;
  double abs_sum = 0.0;
  Vec base;

  static SegmentOracle from_solution(const Vec& xstar, Index i1, Index i2);
  double distance(const Vec& x) const;
  Vec project(const Vec& x) const;
};

struct ProblemInstance {
  enum class Kind { LassoDup, BasisPursuitDup, NoScLasso, SmallEnum };

  Kind kind = Kind::LassoDup;
  Index m = 0, n = 0;
  double density = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;

  Mat a;
  Vec b;
  Vec c;        // linear term of f; zero except for constructed instances
  Vec u_truth;  // sparse ground truth (b = A u for the generated kinds)

  Index dup_i1 = -1, dup_i2 = -1;
  std::optional<Vec> xstar;  // certified stationary point (NoScLasso, SmallEnum)
  Index no_sc_coord = -1;    // the SC-violating zero coordinate
  bool rank_deficient = false;

  SmoothFn smooth() const;       // quadratic part (not for BasisPursuitDup)
  ProxFn l1_part() const;        // L1(lambda), or L1(1) for basis pursuit
  ProxFn affine_part() const;    // BasisPursuitDup: indicator of {Ax=b}

  // 0.95 / lambda_max(A^T A) with lambda_max from 100 power-iteration steps
  // (PGM/ALM); 1.0 for DRS.
  double default_step_pgm() const;
  static constexpr double kDefaultStepDrs = 1.0;

  ResidualSystem pgm_system(std::optional<double> t = std::nullopt) const;
  ResidualSystem drs_system(std::optional<double> t = std::nullopt) const;
  ResidualSystem alm_system(Vec z, std::optional<double> t = std::nullopt) const;

  SegmentOracle segment_oracle(const Vec& solved_x) const;

  static std::string kind_name(Kind k);
  static Kind kind_from_name(const std::string& name);
};

// Lasso with a duplicated column: Gaussian A (m x n), sparse standard-normal
// ground truth u on round(density*n) uniformly drawn support indices, the
// first two support columns duplicated (A[:,i1] = A[:,i2] exactly), b = A u.
ProblemInstance gen_lasso_dup(Index m, Index n, double density, double lambda,
                              std::uint64_t seed);

// Basis pursuit: as gen_lasso_dup, then rows of A orthonormalized via thin QR
// of A^T; the duplicate column is re-pinned exactly and b recomputed as A u.
ProblemInstance gen_basis_pursuit_dup(Index m, Index n, double density, std::uint64_t seed);

// Constructed Lasso instance whose certified stationary point x* violates
// strict complementarity at exactly one zero coordinate i0
// (|grad f(x*)|_{i0} = lambda, attained by direct assignment of c).
ProblemInstance gen_no_sc_lasso(Index n, std::uint64_t seed);

// Oracle-scale instance (n in [3,6]) for BD-regularity enumeration: shaped
// spectrum, random support, with probability 1/2 a forced boundary
// coordinate and with probability 1/3 an exactly rank-deficient Hessian
// (duplicated support column).
ProblemInstance gen_small_enum(Index n, std::uint64_t seed);

struct LassoPathConfig {
  int budget = 200;       // total prox-gradient steps spent on the path
  int stages = 5;         // geometric lambda stages
  double final_mult = 1.3;  // path ends at final_mult * lambda (sparse-side handoff)
  double stage_eta = 0.05;  // per-stage exit: stage residual <= eta * t * lambda_s
};

// Warm start for Lasso solves: accelerated prox-gradient steps along a
// geometric lambda-continuation path ending one multiplier above the target.
// Plain prox-gradient at the target lambda cannot identify the active set in
// any reasonable budget at small lambda (the iterate slides along null(A) at
// speed t*lambda); approaching along the path keeps the active set sparse
// the whole way, which is what the Newton phase needs.
Vec lasso_path_warm_start(const SmoothFn& f, double lambda, double t,
                          const LassoPathConfig& cfg = {});

}  // namespace ssnkit
