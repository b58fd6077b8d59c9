#include "ssnkit/residuals.hpp"

#include <cmath>

#include "ssnkit/kernels.hpp"

namespace ssnkit {

ResidualSystem::ResidualSystem(Kind k, std::optional<SmoothFn> f, std::optional<ProxFn> pf,
                               ProxFn h, double t, Vec z)
    : kind_(k), n_(h.dim()), t_(t), f_(std::move(f)), prox_f_(std::move(pf)),
      h_(std::move(h)), z_(std::move(z)) {}

ResidualSystem ResidualSystem::pgm(SmoothFn f, ProxFn h, double t) {
  require(f.kind() == SmoothFn::Kind::Quadratic, "pgm: f must be quadratic");
  require(f.dim() == h.dim(), "pgm: f and h dimensions differ");
  require(t > 0.0, "pgm: t must be positive");
  const double lmax = f.hessian_lambda_max();
  require(t * lmax <= 1.0 - 1e-12,
          "pgm: t must satisfy t < 1/lambda_max(hessian), got t*lambda_max = " +
              std::to_string(t * lmax));
  return ResidualSystem(Kind::PGM, std::move(f), std::nullopt, std::move(h), t, Vec());
}

ResidualSystem ResidualSystem::drs(ProxFn f, ProxFn h, double t) {
  require(f.dim() == h.dim(), "drs: f and h dimensions differ");
  require(t > 0.0, "drs: t must be positive");
  return ResidualSystem(Kind::DRS, std::nullopt, std::move(f), std::move(h), t, Vec());
}

ResidualSystem ResidualSystem::alm(SmoothFn f, ProxFn h, double t, Vec z) {
  require(f.kind() == SmoothFn::Kind::Quadratic, "alm: f must be quadratic");
  require(f.dim() == h.dim(), "alm: f and h dimensions differ");
  require(t > 0.0, "alm: t must be positive");
  require_dim(z, h.dim(), "alm dual parameter");
  return ResidualSystem(Kind::ALM, std::move(f), std::nullopt, std::move(h), t, std::move(z));
}

const SmoothFn& ResidualSystem::smooth_f() const {
  require(f_.has_value(), "smooth_f: DRS system has no smooth part");
  return *f_;
}

const ProxFn& ResidualSystem::prox_f() const {
  require(prox_f_.has_value(), "prox_f: only DRS systems carry f as a prox");
  return *prox_f_;
}

const Vec& ResidualSystem::alm_z() const {
  require(kind_ == Kind::ALM, "alm_z: ALM systems only");
  return z_;
}

Vec ResidualSystem::prox_argument(const Vec& x) const {
  require_dim(x, n_, "residual eval");
  Vec u(n_);
  switch (kind_) {
    case Kind::PGM: {
      const Vec g = f_->gradient(x);
      kernels::axpby(1.0, x.data(), -t_, g.data(), u.data(), x.size());
      break;
    }
    case Kind::DRS:
      u = x;  // the DRS variable itself feeds prox_th
      break;
    case Kind::ALM:
      kernels::axpby(1.0, x.data(), -t_, z_.data(), u.data(), x.size());
      break;
  }
  return u;
}

Vec ResidualSystem::eval(const Vec& x) const {
  const Vec u = prox_argument(x);
  const Vec p = h_.prox(t_, u);
  Vec out(n_);
  switch (kind_) {
    case Kind::PGM:
      kernels::sub(x.data(), p.data(), out.data(), x.size());
      break;
    case Kind::DRS: {
      Vec w(n_);
      kernels::axpby(2.0, p.data(), -1.0, x.data(), w.data(), x.size());
      const Vec q = prox_f_->prox(t_, w);
      kernels::sub(p.data(), q.data(), out.data(), x.size());
      break;
    }
    case Kind::ALM: {
      const Vec g = f_->gradient(x);
      Vec up(n_);
      kernels::sub(u.data(), p.data(), up.data(), x.size());
      kernels::axpby(1.0, g.data(), 1.0 / t_, up.data(), out.data(), x.size());
      break;
    }
  }
  return out;
}

namespace {

Mat assemble(ResidualSystem::Kind kind, double t, const Mat& m, const Mat* hessian,
             const Mat* d_inner) {
  const Index n = m.rows();
  switch (kind) {
    case ResidualSystem::Kind::PGM: {
      // I - M (I - t H)
      Mat j = -(m * (Mat::Identity(n, n) - t * (*hessian)));
      j.diagonal().array() += 1.0;
      return j;
    }
    case ResidualSystem::Kind::DRS: {
      // M - D (2M - I)
      return m - (*d_inner) * (2.0 * m - Mat::Identity(n, n));
    }
    case ResidualSystem::Kind::ALM: {
      // H + (I - M) / t
      Mat j = *hessian + (1.0 / t) * (Mat::Identity(n, n) - m);
      return j;
    }
  }
  return Mat();
}

}  // namespace

JacobianElement ResidualSystem::bjacobian(const Vec& x, TieRule rule,
                                          double boundary_tol) const {
  const Vec u = prox_argument(x);
  const Mat m = h_.prox_bjacobian(t_, u, rule, boundary_tol);
  JacobianElement el;
  el.boundary = h_.prox_boundary_coords(t_, u, boundary_tol);
  if (rule == TieRule::OneOnBoundary && !el.boundary.empty())
    el.tie_bits = (std::uint64_t{1} << el.boundary.size()) - 1;

  if (kind_ == Kind::DRS) {
    const Vec p = h_.prox(t_, u);
    Vec w(n_);
    kernels::axpby(2.0, p.data(), -1.0, x.data(), w.data(), x.size());
    if (prox_f_->nondiff_set_member(t_, w, boundary_tol))
      throw std::domain_error("drs bjacobian: prox_tf is not differentiable at 2*prox_th(z)-z");
    const Mat d = prox_f_->prox_bjacobian(t_, w, rule, boundary_tol);
    el.j = assemble(kind_, t_, m, nullptr, &d);
  } else {
    el.j = assemble(kind_, t_, m, &f_->hessian(), nullptr);
  }
  return el;
}

Index ResidualSystem::bjacobian_multiplicity(const Vec& x, double boundary_tol) const {
  return h_.prox_boundary_multiplicity(t_, prox_argument(x), boundary_tol);
}

std::vector<JacobianElement> ResidualSystem::bjacobian_enumerate(const Vec& x,
                                                                 double boundary_tol,
                                                                 int enum_cap) const {
  const Vec u = prox_argument(x);
  const std::vector<Mat> ms = h_.prox_bjacobian_enumerate(t_, u, boundary_tol, enum_cap);
  const std::vector<Index> boundary = h_.prox_boundary_coords(t_, u, boundary_tol);

  const Mat* hessian = nullptr;
  Mat d_inner;
  if (kind_ == Kind::DRS) {
    const Vec p = h_.prox(t_, u);
    Vec w(n_);
    kernels::axpby(2.0, p.data(), -1.0, x.data(), w.data(), x.size());
    if (prox_f_->nondiff_set_member(t_, w, boundary_tol))
      throw std::domain_error("drs bjacobian: prox_tf is not differentiable at 2*prox_th(z)-z");
    d_inner = prox_f_->prox_bjacobian(t_, w, TieRule::ZeroOnBoundary, boundary_tol);
  } else {
    hessian = &f_->hessian();
  }

  std::vector<JacobianElement> out;
  out.reserve(ms.size());
  for (std::size_t idx = 0; idx < ms.size(); ++idx) {
    JacobianElement el;
    el.j = assemble(kind_, t_, ms[idx], hessian, kind_ == Kind::DRS ? &d_inner : nullptr);
    el.boundary = boundary;
    el.tie_bits = static_cast<std::uint64_t>(idx);
    out.push_back(std::move(el));
  }
  return out;
}

Vec ResidualSystem::first_order_step(const Vec& x) const {
  switch (kind_) {
    case Kind::PGM:
      return h_.prox(t_, prox_argument(x));
    case Kind::DRS:
      return drs_step(x).z;
    case Kind::ALM: {
      // gradient step on the smooth ALM subproblem objective
      const double lip = f_->hessian_lambda_max() + 1.0 / t_;
      return x - (1.0 / lip) * eval(x);
    }
  }
  return x;
}

ResidualSystem::DrsTriple ResidualSystem::drs_step(const Vec& z) const {
  require(kind_ == Kind::DRS, "drs_step: DRS systems only");
  require_dim(z, n_, "drs_step input");
  DrsTriple s;
  s.x = h_.prox(t_, z);
  Vec w(n_);
  kernels::axpby(2.0, s.x.data(), -1.0, z.data(), w.data(), z.size());
  s.y = prox_f_->prox(t_, w);
  s.z = z + s.y - s.x;
  return s;
}

std::pair<Vec, Vec> alm_outer_step(const SmoothFn& f, const ProxFn& h, double t,
                                   const AlmInnerSolver& solve_x, const Vec& z, const Vec& x0,
                                   double inner_tol_factor) {
  const ResidualSystem sys = ResidualSystem::alm(f, h, t, z);
  const double tol = inner_tol_factor * sys.eval(x0).norm();
  const Vec x_next = solve_x(sys, x0, tol);
  const Vec z_next = z + (h.prox(t, x_next - t * z) - x_next) / t;
  return {x_next, z_next};
}

}  // namespace ssnkit
