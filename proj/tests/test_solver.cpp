#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "ssnkit/problems.hpp"
#include "ssnkit/rng.hpp"
#include "ssnkit/solver.hpp"

using namespace ssnkit;

namespace {

bool traces_bitwise_equal(const SolveTrace& a, const SolveTrace& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& ra = a.rows[i];
    const auto& rb = b.rows[i];
    if (std::memcmp(&ra.res_f, &rb.res_f, 8) != 0) return false;
    if (std::memcmp(&ra.mu, &rb.mu, 8) != 0) return false;
    if (std::memcmp(&ra.dnorm, &rb.dnorm, 8) != 0) return false;
    if (std::memcmp(&ra.rnorm, &rb.rnorm, 8) != 0) return false;
    if (ra.step != rb.step) return false;
  }
  return a.x_final.size() == b.x_final.size() &&
         std::memcmp(a.x_final.data(), b.x_final.data(),
                     sizeof(double) * a.x_final.size()) == 0;
}

}  // namespace

TEST_CASE("config validation names the violated constraint") {
  SolverConfig cfg;
  cfg.inexact_q = 3.0;
  try {
    cfg.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(1,2]") != std::string::npos);
  }
  cfg = SolverConfig{};
  cfg.nu = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.tol_residual = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("starting at a root gives a length-1 converged trace") {
  const ProblemInstance inst = gen_no_sc_lasso(8, 1);
  const ResidualSystem sys = inst.pgm_system();
  const SolveTrace tr = ssn_solve(sys, *inst.xstar, SolverConfig{});
  CHECK(tr.status == TerminalStatus::Converged);
  CHECK(tr.rows.size() == 1);
  CHECK(tr.rows[0].step == StepKind::None);
}

TEST_CASE("quadratic with zero h: Newton equals the direct solve") {
  Rng rng(50);
  const Index n = 6;
  Mat a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = rng.normal();
  Vec b(n), x0(n);
  for (Index i = 0; i < n; ++i) {
    b[i] = rng.normal();
    x0[i] = rng.normal();
  }
  const SmoothFn f = SmoothFn::quadratic(a, b, Vec::Zero(n));
  const double t = 0.9 / f.hessian_lambda_max();
  const ResidualSystem sys = ResidualSystem::pgm(f, ProxFn::zero(n), t);

  // F(x) = t * grad f(x); the unregularized Newton step from any x0 lands on
  // the direct solution of grad f = 0
  const Vec x_direct = f.hessian().ldlt().solve(a.transpose() * b);
  const Mat j = sys.bjacobian(x0).j;
  const Vec d = Eigen::PartialPivLU<Mat>(j).solve(-sys.eval(x0));
  CHECK((x0 + d - x_direct).norm() <= 1e-9 * (1.0 + x_direct.norm()));

  // with the mu_k = ||F_k|| shift the solver still converges in a few steps
  SolverConfig cfg;
  cfg.tol_residual = 1e-13;
  const SolveTrace tr = ssn_solve(sys, x0, cfg);
  CHECK(tr.status == TerminalStatus::Converged);
  CHECK(tr.iterations() <= 30);
  CHECK((tr.x_final - x_direct).norm() <= 1e-8 * (1.0 + x_direct.norm()));
}

TEST_CASE("lasso with duplicated column: converged superlinear tail") {
  const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-3, 7);
  const ResidualSystem sys = inst.pgm_system();
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  SolverConfig cfg;
  const SolveTrace tr = ssn_solve(sys, x0, cfg);
  CHECK(tr.status == TerminalStatus::Converged);
  CHECK(tr.final_residual() <= 1e-12);
  const RateEstimate rate = rate_estimate(tr);
  CHECK_FALSE(rate.undetermined);
  CHECK(rate.superlinear);
}

TEST_CASE("shift rule: recorded mu equals recorded residual bitwise") {
  const ProblemInstance inst = gen_lasso_dup(12, 24, 0.2, 1e-1, 9);
  const ResidualSystem sys = inst.pgm_system();
  const SolveTrace tr = ssn_solve(sys, Vec::Zero(24), SolverConfig{});
  for (const auto& row : tr.rows) CHECK(std::memcmp(&row.mu, &row.res_f, 8) == 0);
}

TEST_CASE("iterative linear solver obeys the inexactness contract") {
  const ProblemInstance inst = gen_lasso_dup(12, 24, 0.2, 1e-1, 11);
  const ResidualSystem sys = inst.pgm_system();
  SolverConfig cfg;
  cfg.linear_solver = LinearSolverKind::Iterative;
  cfg.inexact_l3 = 1.0;
  cfg.inexact_q = 1.5;
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  const SolveTrace tr = ssn_solve(sys, x0, cfg);
  CHECK(tr.status == TerminalStatus::Converged);
  int newton_steps = 0;
  for (const auto& row : tr.rows) {
    if (row.step != StepKind::Newton) continue;
    ++newton_steps;
    CHECK(row.rnorm <= cfg.inexact_l3 * row.mu * std::pow(row.res_f, cfg.inexact_q) + 1e-300);
  }
  CHECK(newton_steps > 0);
}

TEST_CASE("determinism: identical config gives bitwise-identical traces") {
  const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-3, 13);
  const ResidualSystem sys = inst.pgm_system();
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  SolverConfig cfg;
  cfg.store_iterates = true;
  const SolveTrace t1 = ssn_solve(sys, x0, cfg);
  const SolveTrace t2 = ssn_solve(sys, x0, cfg);
  CHECK(traces_bitwise_equal(t1, t2));
}

TEST_CASE("projected solve with full support matches ssn_solve bitwise") {
  const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-3, 17);
  const ResidualSystem sys = inst.pgm_system();
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  SolverConfig cfg;
  const SolveTrace plain = ssn_solve(sys, x0, cfg);
  const SolveTrace proj = projected_ssn_solve(sys, SupportManifold::full(64), x0, cfg);
  CHECK(traces_bitwise_equal(plain, proj));
}

TEST_CASE("projected solve keeps iterates on the manifold and converges superlinearly") {
  const ProblemInstance inst = gen_no_sc_lasso(12, 3);
  const ResidualSystem sys = inst.pgm_system();
  const Vec& xstar = *inst.xstar;
  std::vector<Index> support;
  for (Index i = 0; i < 12; ++i)
    if (xstar[i] != 0.0) support.push_back(i);
  const SupportManifold m(support, 12);

  // on-manifold start with a residual inside the rate window
  Rng rng(51);
  Vec dir = Vec::Zero(12);
  for (Index i : support) dir[i] = rng.normal();
  dir /= dir.norm();
  Vec x0;
  double scale = 1.0;
  for (int tries = 0; tries < 60; ++tries) {
    x0 = xstar + scale * dir;
    const double r = sys.eval(x0).norm();
    if (r <= 5e-3 && r >= 1e-4) break;
    scale *= (r > 5e-3) ? 0.5 : 1.6;
  }

  SolverConfig cfg;
  cfg.store_iterates = true;
  const SolveTrace tr = projected_ssn_solve(sys, m, x0, cfg);
  CHECK(tr.status == TerminalStatus::Converged);
  for (const auto& row : tr.rows)
    if (row.x) CHECK(m.contains(*row.x));
  const RateEstimate rate = rate_estimate(tr);
  CHECK_FALSE(rate.undetermined);
  CHECK(rate.superlinear);

  // off-manifold x0 is projected with a warning record
  Vec off = x0;
  off[inst.no_sc_coord] = 0.3;
  const SolveTrace tw = projected_ssn_solve(sys, m, off, cfg);
  CHECK(tw.x0_projected);

  // root start inside the manifold: length-1 trace
  const SolveTrace tz = projected_ssn_solve(sys, m, xstar, cfg);
  CHECK(tz.rows.size() == 1);
  CHECK(tz.status == TerminalStatus::Converged);
}

TEST_CASE("direction bound: fitted constant holds on held-out iterations") {
  struct Pt {
    double dnorm, dist, slack;
  };
  std::vector<Pt> pts;
  for (std::uint64_t seed : {19ULL, 23ULL, 29ULL, 31ULL}) {
    const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-3, seed);
    const ResidualSystem sys = inst.pgm_system();
    const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
    SolverConfig cfg;
    cfg.store_iterates = true;
    const SolveTrace tr = ssn_solve(sys, x0, cfg);
    REQUIRE(tr.status == TerminalStatus::Converged);
    const SegmentOracle oracle = inst.segment_oracle(tr.x_final);
    for (const auto& row : tr.rows) {
      if (row.step != StepKind::Newton || !row.x) continue;
      const double dist = oracle.distance(*row.x);
      if (dist <= 1e-13) continue;
      pts.push_back({row.dnorm, dist, row.rnorm / row.mu});
    }
  }
  REQUIRE(pts.size() >= 4);
  const std::size_t half = pts.size() / 2;
  double c = 0.0;
  for (std::size_t i = 0; i < half; ++i)
    c = std::max(c, (pts[i].dnorm - pts[i].slack) / pts[i].dist);
  for (std::size_t i = half; i < pts.size(); ++i)
    CHECK(pts[i].dnorm <= 1.5 * c * pts[i].dist + pts[i].slack + 1e-12);
}

TEST_CASE("rate estimation on synthetic sequences") {
  // geometric: linear rate, not superlinear
  std::vector<double> geo;
  for (int k = 0; k < 40; ++k) geo.push_back(std::pow(0.5, k));
  const RateEstimate rg = rate_estimate(geo);
  CHECK_FALSE(rg.undetermined);
  CHECK(rg.q_hat == doctest::Approx(1.0).epsilon(0.1));
  CHECK_FALSE(rg.superlinear);

  // double-exponential: quadratic
  std::vector<double> quad;
  for (int k = 0; k <= 4; ++k) quad.push_back(std::pow(10.0, -std::pow(2.0, k)));
  const RateEstimate rq = rate_estimate(quad);
  CHECK_FALSE(rq.undetermined);
  CHECK(rq.q_hat == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rq.superlinear);

  // insufficient tail
  const RateEstimate ru = rate_estimate(std::vector<double>{1.0, 0.5, 1e-20});
  CHECK(ru.undetermined);

  // fast but linear: constant ratio below 0.1 still fails the strict decrease
  std::vector<double> fast;
  for (int k = 0; k < 12; ++k) fast.push_back(1e-3 * std::pow(0.05, k));
  const RateEstimate rf = rate_estimate(fast);
  CHECK_FALSE(rf.undetermined);
  CHECK_FALSE(rf.superlinear);
}
