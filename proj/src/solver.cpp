#include "ssnkit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ssnkit {

void SolverConfig::validate() const {
  require(max_iters >= 0, "solver config: max_iters must be nonnegative");
  require(tol_residual > 0.0, "solver config: tol_residual must be positive");
  require(inexact_q > 1.0 && inexact_q <= 2.0,
          "solver config: inexact_q must lie in (1,2], got " + std::to_string(inexact_q));
  require(inexact_l3 >= 0.0, "solver config: inexact_l3 must be nonnegative");
  require(nu > 0.0 && nu < 1.0,
          "solver config: nu must lie in (0,1), got " + std::to_string(nu));
}

std::vector<double> SolveTrace::residual_history() const {
  std::vector<double> h;
  h.reserve(rows.size());
  for (const auto& r : rows) h.push_back(r.res_f);
  return h;
}

namespace {

struct LinSolveResult {
  Vec d;
  double rnorm = 0.0;
  bool ok = false;
};

// Full GMRES (modified Gram-Schmidt, Givens rotations) on A d = rhs,
// stopped at an absolute residual target. n is small here, so no restarts.
LinSolveResult gmres(const Mat& a, const Vec& rhs, double target) {
  const Index n = rhs.size();
  LinSolveResult out;
  out.d = Vec::Zero(n);
  const double beta = rhs.norm();
  if (beta <= target) {
    out.rnorm = beta;
    out.ok = true;
    return out;
  }

  Mat v(n, n + 1);
  Mat h = Mat::Zero(n + 1, n);
  Vec cs = Vec::Zero(n), sn = Vec::Zero(n);
  Vec g = Vec::Zero(n + 1);
  v.col(0) = rhs / beta;
  g[0] = beta;

  Index j = 0;
  for (; j < n; ++j) {
    Vec w = a * v.col(j);
    for (Index i = 0; i <= j; ++i) {
      h(i, j) = v.col(i).dot(w);
      w -= h(i, j) * v.col(i);
    }
    h(j + 1, j) = w.norm();
    const bool breakdown = h(j + 1, j) == 0.0;
    if (!breakdown) v.col(j + 1) = w / h(j + 1, j);

    for (Index i = 0; i < j; ++i) {
      const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
      h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    const double denom = std::hypot(h(j, j), h(j + 1, j));
    if (denom == 0.0) break;
    cs[j] = h(j, j) / denom;
    sn[j] = h(j + 1, j) / denom;
    h(j, j) = denom;
    h(j + 1, j) = 0.0;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];

    if (std::fabs(g[j + 1]) <= target || breakdown) {
      ++j;
      break;
    }
  }

  const Index m = std::min(j, n);
  if (m == 0) return out;
  Vec y(m);
  for (Index i = m - 1; i >= 0; --i) {
    double s = g[i];
    for (Index l = i + 1; l < m; ++l) s -= h(i, l) * y[l];
    y[i] = s / h(i, i);
  }
  out.d = v.leftCols(m) * y;
  out.rnorm = (a * out.d - rhs).norm();
  out.ok = out.d.allFinite();
  return out;
}

LinSolveResult solve_shifted(const Mat& a, const Vec& rhs, const SolverConfig& cfg, double mu,
                             double res_f) {
  LinSolveResult out;
  if (cfg.linear_solver == LinearSolverKind::Iterative) {
    const double target = cfg.inexact_l3 * mu * std::pow(res_f, cfg.inexact_q);
    // inner stop slightly under the contract so the recomputed true residual
    // still satisfies it
    out = gmres(a, rhs, 0.5 * target);
    return out;
  }
  Eigen::PartialPivLU<Mat> lu(a);
  out.d = lu.solve(rhs);
  out.ok = out.d.allFinite();
  if (out.ok) out.rnorm = (a * out.d - rhs).norm();
  return out;
}

SolveTrace solve_core(const ResidualSystem& system, const SupportManifold& manifold,
                      const Vec& x0, const SolverConfig& cfg) {
  cfg.validate();
  require_dim(x0, system.dim(), "solver x0");
  const Index n = system.dim();
  const bool full = manifold.is_full();

  SolveTrace trace;
  Vec x = manifold.project(x0);
  for (Index i = 0; i < n; ++i)
    if (x[i] != x0[i]) {
      trace.x0_projected = true;
      break;
    }

  Vec f = system.eval(x);
  double res_f = f.norm();

  using Clock = std::chrono::steady_clock;
  for (int k = 0;; ++k) {
    IterRow row;
    row.k = k;
    row.res_f = res_f;
    row.mu = res_f;  // shift rule: mu_k = ||F_k||, recorded as the same value
    if (cfg.store_iterates) row.x = x;

    if (!std::isfinite(res_f)) {
      trace.rows.push_back(std::move(row));
      trace.status = TerminalStatus::LinearSolveFailure;
      break;
    }
    if (res_f <= cfg.tol_residual) {
      trace.rows.push_back(std::move(row));
      trace.status = TerminalStatus::Converged;
      break;
    }
    if (k >= cfg.max_iters) {
      trace.rows.push_back(std::move(row));
      trace.status = TerminalStatus::MaxIters;
      break;
    }

    const auto tic = Clock::now();
    const double mu = res_f;

    Mat a = system.bjacobian(x, cfg.tie_rule, cfg.boundary_tol).j;
    if (!full) {
      // column masking realizes J*P exactly (P diagonal 0/1)
      for (Index i = 0; i < n; ++i)
        if (!manifold.in_support(i)) a.col(i).setZero();
    }
    a.diagonal().array() += mu;

    const LinSolveResult lin = solve_shifted(a, -f, cfg, mu, res_f);
    if (!lin.ok) {
      row.step = StepKind::None;
      row.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - tic).count();
      trace.rows.push_back(std::move(row));
      trace.status = TerminalStatus::LinearSolveFailure;
      break;
    }

    Vec x_next = manifold.project(x + lin.d);
    Vec f_next = system.eval(x_next);
    double res_next = f_next.norm();
    row.step = StepKind::Newton;
    row.dnorm = lin.d.norm();
    row.rnorm = lin.rnorm;

    if (cfg.globalization == GlobalizationKind::ResidualDecrease &&
        !(res_next <= cfg.nu * res_f)) {
      x_next = manifold.project(system.first_order_step(x));
      f_next = system.eval(x_next);
      res_next = f_next.norm();
      row.step = StepKind::Fallback;
      row.dnorm = (x_next - x).norm();
    }

    row.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - tic).count();
    trace.rows.push_back(std::move(row));

    x = std::move(x_next);
    f = std::move(f_next);
    res_f = res_next;
  }

  trace.x_final = std::move(x);
  return trace;
}

}  // namespace

SolveTrace ssn_solve(const ResidualSystem& system, const Vec& x0, const SolverConfig& cfg) {
  return solve_core(system, SupportManifold::full(system.dim()), x0, cfg);
}

SolveTrace projected_ssn_solve(const ResidualSystem& system, const SupportManifold& manifold,
                               const Vec& x0, const SolverConfig& cfg) {
  require(manifold.ambient_dim() == system.dim(), "projected solve: manifold dimension mismatch");
  return solve_core(system, manifold, x0, cfg);
}

RateEstimate rate_estimate(const std::vector<double>& res) {
  RateEstimate out;
  out.q_hat = std::numeric_limits<double>::quiet_NaN();
  if (res.size() < 4) return out;

  const auto in_window = [](double v) { return v > 1e-14 && v < 1e-2; };
  int end = static_cast<int>(res.size()) - 1;
  while (end >= 0 && !in_window(res[end])) --end;
  if (end < 0) return out;
  int start = end;
  while (start > 0 && in_window(res[start - 1])) --start;
  if (end - start + 1 < 2) return out;

  std::vector<double> qs, ratios;
  for (int k = start; k < end; ++k) {
    qs.push_back(std::log(res[k + 1]) / std::log(res[k]));
    ratios.push_back(res[k + 1] / res[k]);
  }
  std::sort(qs.begin(), qs.end());
  const std::size_t m = qs.size();
  out.q_hat = (m % 2 == 1) ? qs[m / 2] : 0.5 * (qs[m / 2 - 1] + qs[m / 2]);

  const std::size_t tail = std::min<std::size_t>(3, ratios.size());
  bool decreasing = true;
  for (std::size_t i = ratios.size() - tail; i + 1 < ratios.size(); ++i)
    if (!(ratios[i + 1] < ratios[i])) decreasing = false;
  out.superlinear = decreasing && ratios.back() < 0.1;
  out.undetermined = false;
  return out;
}

RateEstimate rate_estimate(const SolveTrace& trace) {
  return rate_estimate(trace.residual_history());
}

Vec warm_start_first_order(const ResidualSystem& system, Vec x0, int max_steps,
                           double target_res) {
  for (int s = 0; s < max_steps; ++s) {
    if (system.eval(x0).norm() <= target_res) break;
    x0 = system.first_order_step(x0);
  }
  return x0;
}

}  // namespace ssnkit
