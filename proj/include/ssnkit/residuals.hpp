#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ssnkit/func_catalog.hpp"

namespace ssnkit {

// One element of the B-Jacobian of a residual mapping, with the tie
// decisions that produced it.
struct JacobianElement {
  Mat j;
  std::vector<Index> boundary;  // kink coordinates at the prox argument
  std::uint64_t tie_bits = 0;   // bit i set => boundary[i] resolved active
};

// The three residual systems:
//   PGM  F(x) = x - prox_th(x - t grad f(x))
//   DRS  F(z) = prox_th(z) - prox_tf(2 prox_th(z) - z)
//   ALM  F(x) = grad f(x) + (x - t z - prox_th(x - t z)) / t
// Immutable after construction; eval/bjacobian are pure and deterministic
// (same input gives bitwise-identical output).
class ResidualSystem {
 public:
  enum class Kind { PGM, DRS, ALM };

  // Requires quadratic PSD f and t*lambda_max(hessian) <= 1 - 1e-12.
  static ResidualSystem pgm(SmoothFn f, ProxFn h, double t);
  static ResidualSystem drs(ProxFn f, ProxFn h, double t);
  static ResidualSystem alm(SmoothFn f, ProxFn h, double t, Vec z);

  Kind kind() const { return kind_; }
  Index dim() const { return n_; }
  double step() const { return t_; }

  const SmoothFn& smooth_f() const;  // PGM/ALM
  const ProxFn& prox_f() const;      // DRS
  const ProxFn& prox_h() const { return h_; }
  const Vec& alm_z() const;

  Vec eval(const Vec& x) const;

  // Argument fed to prox_th when evaluating at x (the tie decisions live there).
  Vec prox_argument(const Vec& x) const;

  JacobianElement bjacobian(const Vec& x, TieRule rule = TieRule::ZeroOnBoundary,
                            double boundary_tol = kBoundaryTol) const;
  std::vector<JacobianElement> bjacobian_enumerate(const Vec& x,
                                                   double boundary_tol = kBoundaryTol,
                                                   int enum_cap = kEnumCap) const;
  Index bjacobian_multiplicity(const Vec& x, double boundary_tol = kBoundaryTol) const;

  // One first-order step from x: the PGM step, the DRS shadow update, or a
  // gradient step on the ALM subproblem. Used as the solver's fallback.
  Vec first_order_step(const Vec& x) const;

  struct DrsTriple {
    Vec x, y, z;
  };
  // x+ = prox_th(z); y+ = prox_tf(2x+ - z); z+ = z + y+ - x+.
  // The identity z+ - z = -F(z) holds by construction.
  DrsTriple drs_step(const Vec& z) const;

 private:
  ResidualSystem(Kind k, std::optional<SmoothFn> f, std::optional<ProxFn> pf, ProxFn h,
                 double t, Vec z);
  Kind kind_;
  Index n_;
  double t_;
  std::optional<SmoothFn> f_;
  std::optional<ProxFn> prox_f_;
  ProxFn h_;
  Vec z_;
};

// One outer step of the augmented Lagrangian scheme: solve the x-subproblem
// F_ALM(.; z) = 0 to the given accuracy with the supplied solver, then
// z+ = z + (prox_th(x+ - t z) - x+) / t.
using AlmInnerSolver =
    std::function<Vec(const ResidualSystem& alm_system, const Vec& x0, double inner_tol)>;

std::pair<Vec, Vec> alm_outer_step(const SmoothFn& f, const ProxFn& h, double t,
                                   const AlmInnerSolver& solve_x, const Vec& z, const Vec& x0,
                                   double inner_tol_factor = 1e-2);

}  // namespace ssnkit
