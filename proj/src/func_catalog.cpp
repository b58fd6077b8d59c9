#include "ssnkit/func_catalog.hpp"

#include <cmath>
#include <limits>

#include "ssnkit/kernels.hpp"

namespace ssnkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDomainTol = 1e-9;
constexpr double kOrthoTol = 1e-12;

void check_orthonormal_rows(const Mat& a) {
  const Mat g = a * a.transpose();
  const double dev = (g - Mat::Identity(a.rows(), a.rows())).cwiseAbs().maxCoeff();
  require(dev <= kOrthoTol, "affine indicator requires orthonormal rows (deviation " +
                                std::to_string(dev) + " > 1e-12)");
}

}  // namespace

// ---------------------------------------------------------------------------
// SubdiffDescription

SubdiffDescription SubdiffDescription::l1_box(double weight, Vec sign_pattern) {
  SubdiffDescription s;
  s.kind_ = Kind::L1Box;
  s.n_ = sign_pattern.size();
  s.weight_ = weight;
  s.sign_pattern_ = std::move(sign_pattern);
  return s;
}

SubdiffDescription SubdiffDescription::nonneg_cone(std::vector<bool> zero_mask) {
  SubdiffDescription s;
  s.kind_ = Kind::NonnegCone;
  s.n_ = static_cast<Index>(zero_mask.size());
  s.zero_mask_ = std::move(zero_mask);
  return s;
}

SubdiffDescription SubdiffDescription::range_at(std::shared_ptr<const Mat> a) {
  SubdiffDescription s;
  s.kind_ = Kind::RangeAT;
  s.n_ = a->cols();
  s.a_ = std::move(a);
  return s;
}

SubdiffDescription SubdiffDescription::point(Vec p) {
  SubdiffDescription s;
  s.kind_ = Kind::Point;
  s.n_ = p.size();
  s.p_ = std::move(p);
  return s;
}

SubdiffDescription SubdiffDescription::ball(Index n, double radius) {
  SubdiffDescription s;
  s.kind_ = Kind::Ball;
  s.n_ = n;
  s.weight_ = radius;
  return s;
}

double SubdiffDescription::distance(const Vec& v) const {
  require_dim(v, n_, "subdiff query");
  switch (kind_) {
    case Kind::L1Box: {
      double d2 = 0.0;
      for (Index i = 0; i < n_; ++i) {
        const double s = sign_pattern_[i];
        const double e = (s != 0.0) ? v[i] - weight_ * s
                                    : std::max(std::fabs(v[i]) - weight_, 0.0);
        d2 += e * e;
      }
      return std::sqrt(d2);
    }
    case Kind::NonnegCone: {
      double d2 = 0.0;
      for (Index i = 0; i < n_; ++i) {
        const double e = zero_mask_[static_cast<std::size_t>(i)] ? std::max(v[i], 0.0) : v[i];
        d2 += e * e;
      }
      return std::sqrt(d2);
    }
    case Kind::RangeAT:
      return (v - a_->transpose() * ((*a_) * v)).norm();
    case Kind::Point:
      return (v - p_).norm();
    case Kind::Ball:
      return std::max(v.norm() - weight_, 0.0);
  }
  return kInf;
}

bool SubdiffDescription::contains(const Vec& v, double tol) const {
  return distance(v) <= tol;
}

double SubdiffDescription::relint_gap(const Vec& v) const {
  require_dim(v, n_, "subdiff query");
  switch (kind_) {
    case Kind::L1Box: {
      double gap = kInf;
      for (Index i = 0; i < n_; ++i)
        if (sign_pattern_[i] == 0.0) gap = std::min(gap, weight_ - std::fabs(v[i]));
      return gap;
    }
    case Kind::NonnegCone: {
      double gap = kInf;
      for (Index i = 0; i < n_; ++i)
        if (zero_mask_[static_cast<std::size_t>(i)]) gap = std::min(gap, -v[i]);
      return gap;
    }
    case Kind::RangeAT:
    case Kind::Point:
      return kInf;  // relative interior equals the set
    case Kind::Ball:
      return weight_ - v.norm();
  }
  return kInf;
}

bool SubdiffDescription::contains_relint(const Vec& v, double margin) const {
  if (!contains(v, margin > 0 ? margin : kDomainTol)) return false;
  return relint_gap(v) > margin;
}

// ---------------------------------------------------------------------------
// SmoothFn

struct SmoothFn::Data {
  Kind kind;
  Index n;
  Mat a;
  Vec b;
  Vec c;
  Mat hessian;         // Quadratic: A^T A
  double lambda_max;   // Quadratic: lambda_max(A^T A)
};

SmoothFn SmoothFn::quadratic(Mat a, Vec b, Vec c) {
  require(a.rows() == b.size(), "quadratic: A rows must match b");
  require(a.cols() == c.size(), "quadratic: A cols must match c");
  auto d = std::make_shared<Data>();
  d->kind = Kind::Quadratic;
  d->n = a.cols();
  d->hessian = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Mat> es(d->hessian, Eigen::EigenvaluesOnly);
  d->lambda_max = d->n > 0 ? es.eigenvalues().maxCoeff() : 0.0;
  d->a = std::move(a);
  d->b = std::move(b);
  d->c = std::move(c);
  return SmoothFn(std::move(d));
}

SmoothFn SmoothFn::affine_indicator(Mat a, Vec b) {
  require(a.rows() == b.size(), "affine indicator: A rows must match b");
  check_orthonormal_rows(a);
  auto d = std::make_shared<Data>();
  d->kind = Kind::AffineIndicator;
  d->n = a.cols();
  d->lambda_max = 0.0;
  d->a = std::move(a);
  d->b = std::move(b);
  return SmoothFn(std::move(d));
}

SmoothFn::Kind SmoothFn::kind() const { return d_->kind; }
Index SmoothFn::dim() const { return d_->n; }

double SmoothFn::value(const Vec& x) const {
  require_dim(x, d_->n, "f value");
  if (d_->kind == Kind::AffineIndicator)
    return ((d_->a * x - d_->b).cwiseAbs().maxCoeff() <= kDomainTol) ? 0.0 : kInf;
  const Vec r = d_->a * x - d_->b;
  return 0.5 * r.squaredNorm() + d_->c.dot(x);
}

Vec SmoothFn::gradient(const Vec& x) const {
  require(d_->kind == Kind::Quadratic, "gradient: affine indicator has no smooth structure");
  require_dim(x, d_->n, "f gradient");
  return d_->a.transpose() * (d_->a * x - d_->b) + d_->c;
}

const Mat& SmoothFn::hessian() const {
  require(d_->kind == Kind::Quadratic, "hessian: affine indicator has no smooth structure");
  return d_->hessian;
}

double SmoothFn::hessian_lambda_max() const {
  require(d_->kind == Kind::Quadratic, "lambda_max: affine indicator has no smooth structure");
  return d_->lambda_max;
}

const Mat& SmoothFn::a() const { return d_->a; }
const Vec& SmoothFn::b() const { return d_->b; }
const Vec& SmoothFn::c() const {
  require(d_->kind == Kind::Quadratic, "c: quadratic only");
  return d_->c;
}

ProxFn SmoothFn::prox_view() const {
  require(d_->kind == Kind::AffineIndicator, "prox_view: affine indicator only");
  return ProxFn::affine_indicator(d_->a, d_->b);
}

SmoothEval smooth_eval(const SmoothFn& f, const Vec& x) {
  require(f.kind() == SmoothFn::Kind::Quadratic,
          "smooth_eval: affine indicator rejects this call");
  return SmoothEval{f.value(x), f.gradient(x), f.hessian()};
}

// ---------------------------------------------------------------------------
// ProxFn

struct ProxFn::Data {
  Kind kind;
  Index n;
  double weight = 1.0;
  std::shared_ptr<const Mat> a;  // AffineIndicator
  Vec b;
  Mat prox_jacobian;  // AffineIndicator: I - A^T A, constant
};

ProxFn ProxFn::l1(Index n, double weight) {
  require(weight > 0.0, "l1: weight must be positive");
  auto d = std::make_shared<Data>();
  d->kind = Kind::L1;
  d->n = n;
  d->weight = weight;
  return ProxFn(std::move(d));
}

ProxFn ProxFn::l2norm(Index n) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::L2Norm;
  d->n = n;
  return ProxFn(std::move(d));
}

ProxFn ProxFn::nonneg(Index n) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::NonnegIndicator;
  d->n = n;
  return ProxFn(std::move(d));
}

ProxFn ProxFn::affine_indicator(Mat a, Vec b) {
  require(a.rows() == b.size(), "affine indicator: A rows must match b");
  check_orthonormal_rows(a);
  auto d = std::make_shared<Data>();
  d->kind = Kind::AffineIndicator;
  d->n = a.cols();
  d->prox_jacobian = Mat::Identity(a.cols(), a.cols()) - a.transpose() * a;
  d->a = std::make_shared<const Mat>(std::move(a));
  d->b = std::move(b);
  return ProxFn(std::move(d));
}

ProxFn ProxFn::zero(Index n) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::ZeroFn;
  d->n = n;
  return ProxFn(std::move(d));
}

ProxFn::Kind ProxFn::kind() const { return d_->kind; }
Index ProxFn::dim() const { return d_->n; }
double ProxFn::weight() const { return d_->weight; }

const Mat& ProxFn::affine_a() const {
  require(d_->kind == Kind::AffineIndicator, "affine_a: affine indicator only");
  return *d_->a;
}
const Vec& ProxFn::affine_b() const {
  require(d_->kind == Kind::AffineIndicator, "affine_b: affine indicator only");
  return d_->b;
}

double ProxFn::value(const Vec& x) const {
  require_dim(x, d_->n, "phi value");
  switch (d_->kind) {
    case Kind::L1:
      return d_->weight * x.lpNorm<1>();
    case Kind::L2Norm:
      return x.norm();
    case Kind::NonnegIndicator:
      return x.minCoeff() >= -kDomainTol ? 0.0 : kInf;
    case Kind::AffineIndicator:
      return ((*d_->a) * x - d_->b).cwiseAbs().maxCoeff() <= kDomainTol ? 0.0 : kInf;
    case Kind::ZeroFn:
      return 0.0;
  }
  return kInf;
}

Vec ProxFn::prox(double t, const Vec& y) const {
  require(t > 0.0, "prox: t must be positive");
  require_dim(y, d_->n, "prox input");
  Vec out(d_->n);
  switch (d_->kind) {
    case Kind::L1:
      kernels::soft_threshold(y.data(), t * d_->weight, out.data(), y.size());
      break;
    case Kind::L2Norm: {
      const double r = y.norm();
      if (r >= t)
        out = (1.0 - t / r) * y;
      else
        out.setZero();
      break;
    }
    case Kind::NonnegIndicator:
      kernels::clamp_min0(y.data(), out.data(), y.size());
      break;
    case Kind::AffineIndicator:
      out = y - d_->a->transpose() * ((*d_->a) * y - d_->b);
      break;
    case Kind::ZeroFn:
      out = y;
      break;
  }
  return out;
}

std::vector<Index> ProxFn::prox_boundary_coords(double t, const Vec& y,
                                                double boundary_tol) const {
  require(t > 0.0, "prox_bjacobian: t must be positive");
  require_dim(y, d_->n, "prox_bjacobian input");
  std::vector<Index> out;
  if (d_->kind == Kind::L1) {
    const double thr = t * d_->weight;
    for (Index i = 0; i < d_->n; ++i)
      if (std::fabs(std::fabs(y[i]) - thr) <= boundary_tol) out.push_back(i);
  } else if (d_->kind == Kind::NonnegIndicator) {
    for (Index i = 0; i < d_->n; ++i)
      if (std::fabs(y[i]) <= boundary_tol) out.push_back(i);
  }
  return out;
}

Index ProxFn::prox_boundary_multiplicity(double t, const Vec& y, double boundary_tol) const {
  switch (d_->kind) {
    case Kind::L1:
    case Kind::NonnegIndicator:
      return static_cast<Index>(prox_boundary_coords(t, y, boundary_tol).size());
    case Kind::L2Norm:
      return std::fabs(y.norm() - t) <= boundary_tol ? 1 : 0;
    default:
      return 0;
  }
}

namespace {

// L2Norm prox Jacobian outside the kink sphere ||y|| = t.
Mat l2_jacobian_outside(double t, const Vec& y, double r) {
  // d/dy [(1 - t/r) y] = (1 - t/r) I + (t/r^3) y y^T
  Mat j = (t / (r * r * r)) * (y * y.transpose());
  j.diagonal().array() += 1.0 - t / r;
  return j;
}

Mat l2_jacobian_sphere_outer_limit(const Vec& y, double r) {
  return (y * y.transpose()) / (r * r);
}

}  // namespace

Mat ProxFn::prox_bjacobian(double t, const Vec& y, TieRule rule, double boundary_tol) const {
  require(t > 0.0, "prox_bjacobian: t must be positive");
  require_dim(y, d_->n, "prox_bjacobian input");
  const bool tie_active = (rule == TieRule::OneOnBoundary);
  switch (d_->kind) {
    case Kind::L1: {
      const double thr = t * d_->weight;
      Mat m = Mat::Zero(d_->n, d_->n);
      for (Index i = 0; i < d_->n; ++i) {
        const double a = std::fabs(y[i]) - thr;
        if (std::fabs(a) <= boundary_tol)
          m(i, i) = tie_active ? 1.0 : 0.0;
        else
          m(i, i) = a > 0.0 ? 1.0 : 0.0;
      }
      return m;
    }
    case Kind::NonnegIndicator: {
      Mat m = Mat::Zero(d_->n, d_->n);
      for (Index i = 0; i < d_->n; ++i) {
        if (std::fabs(y[i]) <= boundary_tol)
          m(i, i) = tie_active ? 1.0 : 0.0;
        else
          m(i, i) = y[i] > 0.0 ? 1.0 : 0.0;
      }
      return m;
    }
    case Kind::L2Norm: {
      const double r = y.norm();
      if (std::fabs(r - t) <= boundary_tol)
        return tie_active ? l2_jacobian_sphere_outer_limit(y, r) : Mat::Zero(d_->n, d_->n);
      if (r < t) return Mat::Zero(d_->n, d_->n);
      return l2_jacobian_outside(t, y, r);
    }
    case Kind::AffineIndicator:
      return d_->prox_jacobian;
    case Kind::ZeroFn:
      return Mat::Identity(d_->n, d_->n);
  }
  return Mat();
}

std::vector<Mat> ProxFn::prox_bjacobian_enumerate(double t, const Vec& y, double boundary_tol,
                                                  int enum_cap) const {
  require(t > 0.0, "prox_bjacobian: t must be positive");
  require_dim(y, d_->n, "prox_bjacobian input");
  const Index mult = prox_boundary_multiplicity(t, y, boundary_tol);
  if (mult > enum_cap)
    throw std::length_error("prox_bjacobian enumerate: " + std::to_string(mult) +
                            " boundary coordinates exceed cap " + std::to_string(enum_cap));

  if (d_->kind == Kind::L2Norm) {
    const double r = y.norm();
    if (std::fabs(r - t) <= boundary_tol)
      return {Mat::Zero(d_->n, d_->n), l2_jacobian_sphere_outer_limit(y, r)};
    return {prox_bjacobian(t, y, TieRule::ZeroOnBoundary, boundary_tol)};
  }
  if (d_->kind != Kind::L1 && d_->kind != Kind::NonnegIndicator)
    return {prox_bjacobian(t, y, TieRule::ZeroOnBoundary, boundary_tol)};

  const std::vector<Index> boundary = prox_boundary_coords(t, y, boundary_tol);
  const Mat base = prox_bjacobian(t, y, TieRule::ZeroOnBoundary, boundary_tol);
  std::vector<Mat> out;
  out.reserve(std::size_t{1} << boundary.size());
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << boundary.size()); ++bits) {
    Mat m = base;
    for (std::size_t j = 0; j < boundary.size(); ++j)
      if (bits & (std::uint64_t{1} << j)) m(boundary[j], boundary[j]) = 1.0;
    out.push_back(std::move(m));
  }
  return out;
}

bool ProxFn::nondiff_set_member(double t, const Vec& y, double tol) const {
  require(t > 0.0, "nondiff_set_member: t must be positive");
  require(tol >= 0.0, "nondiff_set_member: tol must be nonnegative");
  require_dim(y, d_->n, "nondiff_set_member input");
  switch (d_->kind) {
    case Kind::L1: {
      const double thr = t * d_->weight;
      for (Index i = 0; i < d_->n; ++i)
        if (std::fabs(std::fabs(y[i]) - thr) <= tol) return true;
      return false;
    }
    case Kind::NonnegIndicator:
      for (Index i = 0; i < d_->n; ++i)
        if (std::fabs(y[i]) <= tol) return true;
      return false;
    case Kind::L2Norm:
      return std::fabs(y.norm() - t) <= tol;
    case Kind::AffineIndicator:
    case Kind::ZeroFn:
      return false;
  }
  return false;
}

SubdiffDescription ProxFn::subdiff(const Vec& x) const {
  require_dim(x, d_->n, "subdiff input");
  switch (d_->kind) {
    case Kind::L1: {
      Vec s(d_->n);
      for (Index i = 0; i < d_->n; ++i) s[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
      return SubdiffDescription::l1_box(d_->weight, std::move(s));
    }
    case Kind::L2Norm: {
      const double r = x.norm();
      if (r == 0.0) return SubdiffDescription::ball(d_->n, 1.0);
      return SubdiffDescription::point(x / r);
    }
    case Kind::NonnegIndicator: {
      require(x.minCoeff() >= -kDomainTol, "subdiff: x outside the nonnegative orthant");
      std::vector<bool> zero(static_cast<std::size_t>(d_->n));
      for (Index i = 0; i < d_->n; ++i) zero[static_cast<std::size_t>(i)] = x[i] <= kDomainTol;
      return SubdiffDescription::nonneg_cone(std::move(zero));
    }
    case Kind::AffineIndicator: {
      require(((*d_->a) * x - d_->b).cwiseAbs().maxCoeff() <= kDomainTol,
              "subdiff: x violates the affine constraint");
      return SubdiffDescription::range_at(d_->a);
    }
    case Kind::ZeroFn:
      return SubdiffDescription::point(Vec::Zero(d_->n));
  }
  throw std::logic_error("unreachable");
}

}  // namespace ssnkit
