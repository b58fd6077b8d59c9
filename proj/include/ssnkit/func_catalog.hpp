#pragma once

#include <memory>
#include <vector>

#include "ssnkit/common.hpp"

namespace ssnkit {

// Tie rule for B-Jacobian selection at kink points. ZeroOnBoundary treats a
// boundary coordinate as inactive, which keeps Ker(I-M) smallest.
enum class TieRule { ZeroOnBoundary, OneOnBoundary };

// Structured description of a subdifferential set, supporting membership,
// relative-interior membership and distance queries.
class SubdiffDescription {
 public:
  enum class Kind {
    L1Box,       // v_i = w*s_i on the support, |v_i| <= w elsewhere
    NonnegCone,  // v_i = 0 where x_i > 0, v_i <= 0 where x_i = 0
    RangeAT,     // Range(A^T), A with orthonormal rows
    Point,       // singleton {p}
    Ball,        // {v : ||v|| <= w}
  };

  static SubdiffDescription l1_box(double weight, Vec sign_pattern);
  static SubdiffDescription nonneg_cone(std::vector<bool> zero_mask);
  static SubdiffDescription range_at(std::shared_ptr<const Mat> a);
  static SubdiffDescription point(Vec p);
  static SubdiffDescription ball(Index n, double radius);

  Kind kind() const { return kind_; }
  Index dim() const { return n_; }

  bool contains(const Vec& v, double tol) const;
  // Membership in the relative interior with at least `margin` to spare in
  // the non-degenerate directions.
  bool contains_relint(const Vec& v, double margin) const;
  double distance(const Vec& v) const;
  // Margin of v to the relative boundary along the free directions;
  // +inf when the relative interior equals the set (points, subspaces).
  // Can be negative when v is outside.
  double relint_gap(const Vec& v) const;

 private:
  SubdiffDescription() = default;
  Kind kind_{};
  Index n_ = 0;
  double weight_ = 0.0;
  Vec sign_pattern_;             // L1Box
  std::vector<bool> zero_mask_;  // NonnegCone
  std::shared_ptr<const Mat> a_; // RangeAT
  Vec p_;                        // Point
};

class ProxFn;

// Smooth part f: either a quadratic 0.5*||Ax-b||^2 + c^T x or the indicator
// of {Ax = b} with orthonormal rows (which exposes no gradient; only its
// prox view participates, through the DRS residual).
class SmoothFn {
 public:
  enum class Kind { Quadratic, AffineIndicator };

  static SmoothFn quadratic(Mat a, Vec b, Vec c);
  static SmoothFn affine_indicator(Mat a, Vec b);

  Kind kind() const;
  Index dim() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;    // Quadratic only
  const Mat& hessian() const;          // Quadratic only; A^T A, constant
  double hessian_lambda_max() const;   // exact largest eigenvalue, cached

  const Mat& a() const;
  const Vec& b() const;
  const Vec& c() const;  // Quadratic only

  ProxFn prox_view() const;  // AffineIndicator only

 private:
  struct Data;
  std::shared_ptr<const Data> d_;
  explicit SmoothFn(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
};

struct SmoothEval {
  double value;
  Vec gradient;
  Mat hessian;
};

// value/gradient/Hessian of a Quadratic; rejects AffineIndicator.
SmoothEval smooth_eval(const SmoothFn& f, const Vec& x);

// Nonsmooth part h with exact prox, B-Jacobian elements of the prox,
// subdifferential description, and nondifferentiable-set membership.
// All cataloged functions are convex, so prox is single-valued for t > 0
// and every B-Jacobian element M satisfies 0 <= M <= I.
//
// The catalog is vector-valued only. Matrix-variable analogues (column-group
// l2,1 norms, the nuclear norm, the PSD-cone indicator) have the same
// structure — separable or spectral soft-thresholding with closed
// nondifferentiable sets — but none of the shipped experiments need them.
class ProxFn {
 public:
  enum class Kind { L1, L2Norm, NonnegIndicator, AffineIndicator, ZeroFn };

  static ProxFn l1(Index n, double weight);
  static ProxFn l2norm(Index n);
  static ProxFn nonneg(Index n);
  static ProxFn affine_indicator(Mat a, Vec b);  // orthonormal rows, checked to 1e-12
  static ProxFn zero(Index n);

  Kind kind() const;
  Index dim() const;
  double weight() const;  // L1 weight; 1.0 otherwise

  double value(const Vec& x) const;  // +inf outside an indicator's domain (1e-9 slack)

  Vec prox(double t, const Vec& y) const;

  Mat prox_bjacobian(double t, const Vec& y, TieRule rule = TieRule::ZeroOnBoundary,
                     double boundary_tol = kBoundaryTol) const;

  // Number of binary tie decisions at y; the enumerated set has 2^count elements.
  Index prox_boundary_multiplicity(double t, const Vec& y,
                                   double boundary_tol = kBoundaryTol) const;
  // Boundary coordinate indices for the separable kinds (empty for L2Norm,
  // whose single tie decision is the radial one).
  std::vector<Index> prox_boundary_coords(double t, const Vec& y,
                                          double boundary_tol = kBoundaryTol) const;

  // All B-Jacobian elements at y. Throws std::length_error when the number of
  // boundary decisions exceeds enum_cap.
  std::vector<Mat> prox_bjacobian_enumerate(double t, const Vec& y,
                                            double boundary_tol = kBoundaryTol,
                                            int enum_cap = kEnumCap) const;

  // True iff y lies within tol of the set where prox_{t*phi} is not
  // differentiable (L1: some |y_i| = t*w; Nonneg: some y_i = 0;
  // L2Norm: ||y|| = t; AffineIndicator/ZeroFn: never).
  bool nondiff_set_member(double t, const Vec& y, double tol) const;

  SubdiffDescription subdiff(const Vec& x) const;

  const Mat& affine_a() const;
  const Vec& affine_b() const;

 private:
  struct Data;
  std::shared_ptr<const Data> d_;
  explicit ProxFn(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
};

}  // namespace ssnkit
