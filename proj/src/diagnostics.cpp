#include "ssnkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssnkit/rng.hpp"

namespace ssnkit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigma_min(const Mat& a) {
  if (a.rows() == 0) return kInf;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().minCoeff();
}
}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

SupportInfo support_info(const Vec& x, const Vec& grad, double lambda,
                         const DiagnosticsConfig& cfg) {
  require(x.size() == grad.size(), "support_info: dimension mismatch");
  SupportInfo info;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::fabs(x[i]) > cfg.support_tol)
      info.t1.push_back(i);
    else if (std::fabs(std::fabs(grad[i]) - lambda) <= cfg.sc_tol)
      info.t2.push_back(i);
  }
  info.s = info.t1;
  info.s.insert(info.s.end(), info.t2.begin(), info.t2.end());
  std::sort(info.s.begin(), info.s.end());
  return info;
}

BdRegularity bd_regularity_pgm(const ResidualSystem& system, const Vec& x,
                               const DiagnosticsConfig& cfg) {
  require(system.kind() == ResidualSystem::Kind::PGM, "bd_regularity_pgm: PGM systems only");
  if (system.prox_h().kind() != ProxFn::Kind::L1) return bd_regularity_enumerate(system, x, cfg);

  const SmoothFn& f = system.smooth_f();
  const Vec grad = f.gradient(x);
  const SupportInfo info = support_info(x, grad, system.prox_h().weight(), cfg);

  BdRegularity out;
  out.method = "pgm-support";
  out.elements_tested = 0;
  if (info.s.empty()) {
    out.verdict = Verdict::True;
    out.margin = kInf;
    return out;
  }
  const Mat& h = f.hessian();
  const Index m = static_cast<Index>(info.s.size());
  Mat htt(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) htt(a, b) = h(info.s[a], info.s[b]);
  Eigen::SelfAdjointEigenSolver<Mat> es(htt, Eigen::EigenvaluesOnly);
  out.margin = es.eigenvalues().minCoeff();
  out.verdict = out.margin > cfg.pd_tol ? Verdict::True : Verdict::False;
  return out;
}

BdRegularity bd_regularity_enumerate(const ResidualSystem& system, const Vec& x,
                                     const DiagnosticsConfig& cfg) {
  BdRegularity out;
  out.method = "enumerate";
  const Index mult = system.bjacobian_multiplicity(x, cfg.boundary_tol);
  if (mult > cfg.enum_cap) {
    out.verdict = Verdict::Undetermined;
    out.margin = kNaN;
    return out;
  }
  const auto elements = system.bjacobian_enumerate(x, cfg.boundary_tol, cfg.enum_cap);
  out.margin = kInf;
  for (const auto& el : elements) out.margin = std::min(out.margin, sigma_min(el.j));
  out.elements_tested = static_cast<int>(elements.size());
  out.verdict = out.margin > cfg.pd_tol ? Verdict::True : Verdict::False;
  return out;
}

namespace {

ScResult sc_smooth_case(const SmoothFn& f, const ProxFn& h, const Vec& xstar,
                        const DiagnosticsConfig& cfg) {
  ScResult out;
  const Vec g = f.gradient(xstar);
  switch (h.kind()) {
    case ProxFn::Kind::L1: {
      const double lambda = h.weight();
      double gap = kInf;
      for (Index i = 0; i < xstar.size(); ++i)
        if (std::fabs(xstar[i]) <= cfg.support_tol) gap = std::min(gap, lambda - std::fabs(g[i]));
      out.gap = gap;
      break;
    }
    case ProxFn::Kind::ZeroFn:
      out.gap = kInf;  // subdifferential {0}: 0 = -grad f at stationarity, trivially interior
      break;
    default: {
      // zero out sub-support_tol coordinates so the subdifferential pattern
      // matches the tolerance-based classification used everywhere else
      Vec xc = xstar;
      for (Index i = 0; i < xc.size(); ++i)
        if (std::fabs(xc[i]) <= cfg.support_tol) xc[i] = 0.0;
      out.gap = h.subdiff(xc).relint_gap(-g);
      break;
    }
  }
  out.holds = out.gap > cfg.sc_tol;
  return out;
}

ScResult sc_drs_case(const ResidualSystem& system, const Vec& zstar,
                     const DiagnosticsConfig& cfg) {
  ScResult out;
  const double t = system.step();
  const Vec xstar = system.prox_h().prox(t, zstar);
  if (system.prox_f().kind() == ProxFn::Kind::AffineIndicator &&
      system.prox_h().kind() == ProxFn::Kind::L1) {
    // basis pursuit: dual y* = A(x* - z*)/t, gap over zero coordinates of
    // lambda - |A^T y*|_i
    const Mat& a = system.prox_f().affine_a();
    const Vec ystar = a * (xstar - zstar) / t;
    const Vec aty = a.transpose() * ystar;
    const double lambda = system.prox_h().weight();
    double gap = kInf;
    for (Index i = 0; i < xstar.size(); ++i)
      if (std::fabs(xstar[i]) <= cfg.support_tol) gap = std::min(gap, lambda - std::fabs(aty[i]));
    out.gap = gap;
    out.holds = out.gap > cfg.sc_tol;
    return out;
  }
  // generic composite case: v_h = (z*-x*)/t in ri ∂h(x*) and -v_h in ri ∂f(x*)
  Vec xc = xstar;
  for (Index i = 0; i < xc.size(); ++i)
    if (std::fabs(xc[i]) <= cfg.support_tol) xc[i] = 0.0;
  const Vec vh = (zstar - xstar) / t;
  const double gap_h = system.prox_h().subdiff(xc).relint_gap(vh);
  const double gap_f = system.prox_f().subdiff(xc).relint_gap(-vh);
  out.gap = std::min(gap_h, gap_f);
  out.holds = out.gap > cfg.sc_tol;
  return out;
}

}  // namespace

ScResult sc_check(const ResidualSystem& system, const Vec& point,
                  const DiagnosticsConfig& cfg) {
  const double res = system.eval(point).norm();
  if (!(res <= cfg.stationarity_tol))
    throw std::domain_error("sc_check: point is not stationary (||F|| = " +
                            std::to_string(res) + ")");
  if (system.kind() == ResidualSystem::Kind::DRS) return sc_drs_case(system, point, cfg);
  return sc_smooth_case(system.smooth_f(), system.prox_h(), point, cfg);
}

double invertibility_margin(const ResidualSystem& system, const Vec& x, const Mat& p,
                            TieRule rule, double boundary_tol) {
  const double mu = system.eval(x).norm();
  if (mu == 0.0)
    throw std::domain_error("invertibility_margin: x is an exact root, margin undefined");
  Mat a = system.bjacobian(x, rule, boundary_tol).j * p;
  a.diagonal().array() += mu;
  return sigma_min(a) - mu;
}

namespace {

Vec ball_sample(const Vec& center, double radius, Rng& rng, const SupportManifold* manifold) {
  Vec dir(center.size());
  for (Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
  if (manifold) dir = manifold->project(dir);
  const double norm = dir.norm();
  if (norm == 0.0) return center;
  return center + (radius * rng.uniform() / norm) * dir;
}

}  // namespace

ErrorBound error_bound_estimate(const ResidualSystem& system, const Vec& xstar,
                                const DistanceOracle& distance, double radius, int samples,
                                std::uint64_t seed, const SupportManifold* manifold,
                                const ProjectionOracle* projection,
                                const DiagnosticsConfig& cfg) {
  require(static_cast<bool>(distance), "error_bound_estimate: distance oracle required");
  const double res0 = system.eval(xstar).norm();
  require(res0 <= cfg.root_tol, "error_bound_estimate: x* must be a root");

  Rng rng(seed, 17);
  ErrorBound out;
  out.gamma_hat = kInf;
  Vec prev;
  double prev_res = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = ball_sample(xstar, radius, rng, manifold);
    const double d = distance(x);
    const double fn = system.eval(x).norm();
    if (d > 1e-13 * (1.0 + radius)) {
      out.gamma_hat = std::min(out.gamma_hat, fn / d);
      ++out.samples_used;
    }
    if (projection) {
      const Vec px = (*projection)(x);
      const double gap = (x - px).norm();
      if (gap > 1e-13 * (1.0 + radius)) {
        const double lip = (system.eval(px) - system.eval(x)).norm() / gap;
        out.lipschitz_hat = std::max(out.lipschitz_hat, lip);
      }
    }
    if (s > 0) {
      const double gap = (x - prev).norm();
      if (gap > 0.0)
        out.lipschitz_hat = std::max(out.lipschitz_hat, std::fabs(fn - prev_res) / gap);
    }
    prev = x;
    prev_res = fn;
  }
  return out;
}

std::vector<double> error_bound_profile(const ResidualSystem& system, const Vec& xstar,
                                        const DistanceOracle& distance,
                                        const std::vector<double>& radii, int samples,
                                        std::uint64_t seed, const SupportManifold* manifold,
                                        const DiagnosticsConfig& cfg) {
  require(!radii.empty(), "error_bound_profile: radii required");
  const double res0 = system.eval(xstar).norm();
  require(res0 <= cfg.root_tol, "error_bound_profile: x* must be a root");
  const double rmax = radii.back();

  Rng rng(seed, 17);
  std::vector<double> out(radii.size(), kInf);
  for (int s = 0; s < samples; ++s) {
    const Vec x = ball_sample(xstar, rmax, rng, manifold);
    const double d = distance(x);
    if (d <= 1e-13 * (1.0 + rmax)) continue;
    const double ratio = system.eval(x).norm() / d;
    const double dist_center = (x - xstar).norm();
    for (std::size_t r = 0; r < radii.size(); ++r)
      if (dist_center <= radii[r]) out[r] = std::min(out[r], ratio);
  }
  return out;
}

double smoothness_probe(const ResidualSystem& system, const Vec& xstar, double radius,
                        int samples, std::uint64_t seed, const SupportManifold* manifold,
                        TieRule rule, const DiagnosticsConfig& cfg) {
  require(radius >= 0.0, "smoothness_probe: radius must be nonnegative");
  std::vector<Mat> distinct;
  const auto add = [&](const Vec& x) {
    const Mat j = system.bjacobian(x, rule, cfg.boundary_tol).j;
    for (const Mat& seen : distinct)
      if (seen == j) return;
    distinct.push_back(j);
  };

  add(xstar);
  if (radius > 0.0) {
    const Index n = xstar.size();
    for (Index i = 0; i < n; ++i) {
      if (manifold && !manifold->in_support(i)) continue;
      Vec e = xstar;
      e[i] += radius;
      add(e);
      e[i] = xstar[i] - radius;
      add(e);
    }
    Rng rng(seed, 23);
    for (int s = 0; s < samples; ++s) add(ball_sample(xstar, radius, rng, manifold));
  }

  double dev = 0.0;
  for (std::size_t a = 0; a < distinct.size(); ++a)
    for (std::size_t b = a + 1; b < distinct.size(); ++b)
      dev = std::max(dev, (distinct[a] - distinct[b]).norm());
  return dev;
}

DiagnosticsReport diagnose(const ResidualSystem& system, const Vec& point,
                           const DiagnosticsConfig& cfg) {
  DiagnosticsReport rep;
  rep.cfg = cfg;
  rep.residual_norm = system.eval(point).norm();
  rep.stationary = rep.residual_norm <= cfg.stationarity_tol;

  if (system.kind() == ResidualSystem::Kind::PGM &&
      system.prox_h().kind() == ProxFn::Kind::L1)
    rep.bd = bd_regularity_pgm(system, point, cfg);
  else
    rep.bd = bd_regularity_enumerate(system, point, cfg);

  if (rep.stationary) {
    const ScResult sc = sc_check(system, point, cfg);
    rep.sc_holds = sc.holds;
    rep.sc_gap = sc.gap;
    rep.sc_evaluated = true;
  }

  if (rep.residual_norm > 0.0) {
    const Mat p = Mat::Identity(system.dim(), system.dim());
    rep.invertibility = invertibility_margin(system, point, p, TieRule::ZeroOnBoundary,
                                             cfg.boundary_tol);
  } else {
    rep.invertibility = kNaN;
  }

  if (rep.stationary && rep.sc_evaluated) {
    double radius;
    if (rep.sc_holds && std::isfinite(rep.sc_gap)) {
      double scale = 1.0;
      if (system.kind() != ResidualSystem::Kind::DRS)
        scale = 1.0 + system.smooth_f().hessian_lambda_max();
      radius = 0.1 * rep.sc_gap / scale;
    } else {
      radius = 0.25 * system.step() *
               (system.prox_h().kind() == ProxFn::Kind::L1 ? system.prox_h().weight() : 1.0);
    }
    rep.smoothness_radius = radius;
    rep.smoothness_deviation =
        smoothness_probe(system, point, radius, 32, 0, nullptr, TieRule::ZeroOnBoundary, cfg);
    rep.smoothness_evaluated = true;
  }

  rep.gamma_hat = kNaN;
  rep.lipschitz_hat = kNaN;
  return rep;
}

}  // namespace ssnkit
