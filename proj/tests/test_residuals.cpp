#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ssnkit/problems.hpp"
#include "ssnkit/residuals.hpp"
#include "ssnkit/rng.hpp"
#include "ssnkit/solver.hpp"

using namespace ssnkit;
namespace oracle = ssnkit::testing;

namespace {

Vec random_vec(Rng& rng, Index n, double scale = 1.0) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

struct SmallLasso {
  Mat a;
  Vec b, c;
  double lambda;
  Vec xstar;
  ResidualSystem system;
};

SmallLasso small_lasso_with_oracle_solution(std::uint64_t seed, Index n = 5) {
  Rng rng(seed);
  Mat a(n + 1, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n + 1; ++i) a(i, j) = rng.normal();
  const Vec b = random_vec(rng, n + 1);
  const Vec c = Vec::Zero(n);
  const double lambda = 0.5;
  const auto xs = oracle::lasso_enumerate_solution(a, b, c, lambda);
  REQUIRE(xs.has_value());
  SmoothFn f = SmoothFn::quadratic(a, b, c);
  const double t = 0.9 / f.hessian_lambda_max();
  return SmallLasso{a, b, c, lambda, *xs,
                    ResidualSystem::pgm(std::move(f), ProxFn::l1(n, lambda), t)};
}

}  // namespace

TEST_CASE("PGM residual vanishes at an oracle stationary point") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const SmallLasso p = small_lasso_with_oracle_solution(seed);
    CHECK(p.system.eval(p.xstar).norm() <= 1e-12);
  }
}

TEST_CASE("PGM construction enforces the step bound") {
  const SmoothFn f = SmoothFn::quadratic(2.0 * Mat::Identity(3, 3), Vec::Zero(3), Vec::Zero(3));
  const double lmax = f.hessian_lambda_max();
  CHECK(lmax == doctest::Approx(4.0));
  CHECK_THROWS_AS(ResidualSystem::pgm(f, ProxFn::l1(3, 1.0), 0.25), std::invalid_argument);
  CHECK_THROWS_AS(ResidualSystem::pgm(f, ProxFn::l1(3, 1.0), 0.3), std::invalid_argument);
  CHECK_NOTHROW(ResidualSystem::pgm(f, ProxFn::l1(3, 1.0), 0.2));
}

TEST_CASE("residual evaluation is deterministic bitwise") {
  const SmallLasso p = small_lasso_with_oracle_solution(4);
  Rng rng(40);
  for (int s = 0; s < 10; ++s) {
    const Vec x = random_vec(rng, 5);
    const Vec f1 = p.system.eval(x);
    const Vec f2 = p.system.eval(x);
    CHECK(std::memcmp(f1.data(), f2.data(), sizeof(double) * f1.size()) == 0);
  }
}

TEST_CASE("PGM B-Jacobian: direct substitution with identity Hessian") {
  const SmoothFn f = SmoothFn::quadratic(Mat::Identity(2, 2), Vec::Zero(2), Vec::Zero(2));
  const ResidualSystem sys = ResidualSystem::pgm(f, ProxFn::l1(2, 1.0), 0.5);
  Vec x(2);
  x << 4.0, 0.5;  // prox argument (2, 0.25), threshold 0.5: M = diag(1, 0)
  const Mat j = sys.bjacobian(x).j;
  Mat expect(2, 2);
  expect << 0.5, 0.0, 0.0, 1.0;
  CHECK((j - expect).norm() <= 1e-15);
}

TEST_CASE("DRS with affine f: constant inner Jacobian, assembled form") {
  Rng rng(41);
  const Index n = 6, m = 2;
  Mat g(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(n, m);
  const Mat a = q.transpose();
  const Vec b = a * random_vec(rng, n);
  const ResidualSystem sys = ResidualSystem::drs(ProxFn::affine_indicator(a, b),
                                                 ProxFn::l1(n, 1.0), 1.0);
  const Mat d = Mat::Identity(n, n) - a.transpose() * a;
  for (int s = 0; s < 10; ++s) {
    const Vec z = random_vec(rng, n, 2.0);
    const Vec u = sys.prox_argument(z);
    const Mat mJ = sys.prox_h().prox_bjacobian(1.0, u);
    const Mat expect = mJ - d * (2.0 * mJ - Mat::Identity(n, n));
    CHECK((sys.bjacobian(z).j - expect).norm() <= 1e-14);
  }
}

TEST_CASE("B-Jacobians match finite differences of the residuals") {
  Rng rng(42);
  const double fd_h = 1e-6;

  // PGM and ALM on a small random quadratic + L1
  const SmallLasso p = small_lasso_with_oracle_solution(5);
  const SmoothFn f = SmoothFn::quadratic(p.a, p.b, p.c);
  const double t = p.system.step();
  const ResidualSystem alm =
      ResidualSystem::alm(f, ProxFn::l1(5, p.lambda), t, random_vec(rng, 5));

  for (const ResidualSystem* sys : {&p.system, &alm}) {
    int checked = 0;
    while (checked < 50) {
      const Vec x = random_vec(rng, 5, 2.0);
      const Vec u = sys->prox_argument(x);
      if (sys->prox_h().nondiff_set_member(sys->step(), u, 50 * fd_h)) continue;
      const Mat j = sys->bjacobian(x).j;
      const Mat fd = oracle::fd_jacobian([&](const Vec& v) { return sys->eval(v); }, x, fd_h);
      CHECK((j - fd).norm() <= 1e-5 * (1.0 + j.norm()));
      ++checked;
    }
  }

  // DRS on a small basis-pursuit instance
  const ProblemInstance bp = gen_basis_pursuit_dup(4, 10, 0.3, 7);
  const ResidualSystem drs = bp.drs_system();
  int checked = 0;
  while (checked < 50) {
    const Vec z = random_vec(rng, 10, 2.0);
    if (drs.prox_h().nondiff_set_member(drs.step(), z, 50 * fd_h)) continue;
    const Mat j = drs.bjacobian(z).j;
    const Mat fd = oracle::fd_jacobian([&](const Vec& v) { return drs.eval(v); }, z, fd_h);
    CHECK((j - fd).norm() <= 1e-5 * (1.0 + j.norm()));
    ++checked;
  }
}

TEST_CASE("drs_step: fixed point, hand-composed composition, residual identity") {
  // trivial fixed point with f = 0: F(z) = z - prox_th(z), root z = 0
  const ResidualSystem triv = ResidualSystem::drs(ProxFn::zero(3), ProxFn::l1(3, 1.0), 1.0);
  const auto s0 = triv.drs_step(Vec::Zero(3));
  CHECK(s0.z.norm() == 0.0);

  Rng rng(43);
  const ProblemInstance bp = gen_basis_pursuit_dup(4, 10, 0.3, 11);
  const ResidualSystem sys = bp.drs_system();
  const ProxFn hf = bp.affine_part();
  const ProxFn hh = bp.l1_part();
  for (int s = 0; s < 100; ++s) {
    const Vec z = random_vec(rng, 10, 2.0);
    const auto step = sys.drs_step(z);
    // hand-composed prox calls
    const Vec x = hh.prox(1.0, z);
    const Vec y = hf.prox(1.0, 2.0 * x - z);
    CHECK((step.x - x).norm() == 0.0);
    CHECK((step.y - y).norm() <= 1e-14);
    CHECK((step.z - (z + y - x)).norm() <= 1e-14);
    // z+ - z = -F(z)
    CHECK(((step.z - z) + sys.eval(z)).norm() <= 1e-12);
  }

  // near-root fixed point: iterate DRS until the residual is tiny
  Vec z = Vec::Zero(10);
  for (int it = 0; it < 20000; ++it) {
    z = sys.drs_step(z).z;
    if (sys.eval(z).norm() <= 1e-13) break;
  }
  if (sys.eval(z).norm() <= 1e-13) CHECK((sys.drs_step(z).z - z).norm() <= 1e-12);
}

TEST_CASE("ALM: gradient-mapping identity and residual at stationary points") {
  const SmallLasso p = small_lasso_with_oracle_solution(6);
  const SmoothFn f = SmoothFn::quadratic(p.a, p.b, p.c);
  const ProxFn h = ProxFn::l1(5, p.lambda);
  const double t = p.system.step();

  // F_ALM(x*; grad f(x*)) = 0 at the oracle solution
  const Vec zstar = f.gradient(p.xstar);
  const ResidualSystem alm = ResidualSystem::alm(f, h, t, zstar);
  CHECK(alm.eval(p.xstar).norm() <= 1e-12);

  // F_ALM(x; grad f(x)) = F_PGM(x) / t for arbitrary x
  Rng rng(44);
  for (int s = 0; s < 100; ++s) {
    const Vec x = random_vec(rng, 5, 2.0);
    const ResidualSystem almx = ResidualSystem::alm(f, h, t, f.gradient(x));
    CHECK((almx.eval(x) - p.system.eval(x) / t).norm() <= 1e-12 * (1.0 + p.system.eval(x).norm() / t));
  }
}

TEST_CASE("alm_outer_step: fixed point and bitwise dual update") {
  const SmallLasso p = small_lasso_with_oracle_solution(8);
  const SmoothFn f = SmoothFn::quadratic(p.a, p.b, p.c);
  const ProxFn h = ProxFn::l1(5, p.lambda);
  const double t = p.system.step();
  const Vec zstar = f.gradient(p.xstar);

  // stub solver returning the exact stationary point
  const AlmInnerSolver exact = [&](const ResidualSystem&, const Vec&, double) {
    return p.xstar;
  };
  const auto [x1, z1] = alm_outer_step(f, h, t, exact, zstar, p.xstar);
  CHECK((x1 - p.xstar).norm() == 0.0);
  CHECK((z1 - zstar).norm() <= 1e-12);

  // the dual update is exactly the displayed expression
  Rng rng(45);
  const Vec z = random_vec(rng, 5);
  const Vec xn = random_vec(rng, 5);
  const AlmInnerSolver stub = [&](const ResidualSystem&, const Vec&, double) { return xn; };
  const auto [x2, z2] = alm_outer_step(f, h, t, stub, z, xn);
  const Vec expect = z + (h.prox(t, xn - t * z) - xn) / t;
  CHECK((z2 - expect).norm() == 0.0);
}

TEST_CASE("two ALM outer steps shrink the natural residual") {
  const ProblemInstance inst = gen_lasso_dup(8, 10, 0.25, 0.05, 3);
  const SmoothFn f = inst.smooth();
  const ProxFn h = inst.l1_part();
  const double t = inst.default_step_pgm();
  const ResidualSystem pgm = inst.pgm_system();

  const AlmInnerSolver inner = [](const ResidualSystem& sys, const Vec& x0, double tol) {
    SolverConfig cfg;
    cfg.tol_residual = std::max(tol, 1e-13);
    cfg.max_iters = 200;
    return ssn_solve(sys, x0, cfg).x_final;
  };

  Vec x = Vec::Zero(10), z = Vec::Zero(10);
  const double r0 = pgm.eval(x).norm();
  auto [x1, z1] = alm_outer_step(f, h, t, inner, z, x);
  const double r1 = pgm.eval(x1).norm();
  auto [x2, z2] = alm_outer_step(f, h, t, inner, z1, x1);
  const double r2 = pgm.eval(x2).norm();
  CHECK(r1 < r0);
  CHECK(r2 < r1);
}

TEST_CASE("roots correspond to stationary points (50 oracle instances)") {
  int tested = 0;
  for (std::uint64_t seed = 100; tested < 50; ++seed) {
    Rng rng(seed);
    const Index n = 4;
    Mat a(n + 1, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n + 1; ++i) a(i, j) = rng.normal();
    const Vec b = random_vec(rng, n + 1);
    const Vec c = Vec::Zero(n);
    const double lambda = 0.4;
    const auto xs = oracle::lasso_enumerate_solution(a, b, c, lambda);
    if (!xs) continue;
    SmoothFn f = SmoothFn::quadratic(a, b, c);
    const ResidualSystem sys =
        ResidualSystem::pgm(f, ProxFn::l1(n, lambda), 0.9 / f.hessian_lambda_max());
    REQUIRE(sys.eval(*xs).norm() <= 1e-12);
    // 0 in grad f(x*) + subdiff h(x*), membership within 1e-8
    Vec xc = *xs;
    for (Index i = 0; i < n; ++i)
      if (std::fabs(xc[i]) <= 1e-10) xc[i] = 0.0;
    const auto sd = ProxFn::l1(n, lambda).subdiff(xc);
    CHECK(sd.distance(-f.gradient(*xs)) <= 1e-8);
    ++tested;
  }
}

TEST_CASE("DRS roots yield stationary shadow points") {
  const ProblemInstance bp = gen_basis_pursuit_dup(4, 8, 0.3, 5);
  const ResidualSystem sys = bp.drs_system();
  Vec z = Vec::Zero(8);
  for (int it = 0; it < 50000 && sys.eval(z).norm() > 1e-12; ++it) z = sys.drs_step(z).z;
  REQUIRE(sys.eval(z).norm() <= 1e-12);
  const Vec x = bp.l1_part().prox(1.0, z);
  // x feasible and (z - x)/t in subdiff ||.||_1(x), -(z - x)/t in Range(A^T)
  CHECK((bp.a * x - bp.b).norm() <= 1e-8);
  Vec xc = x;
  for (Index i = 0; i < 8; ++i)
    if (std::fabs(xc[i]) <= 1e-10) xc[i] = 0.0;
  CHECK(bp.l1_part().subdiff(xc).distance(z - x) <= 1e-8);
  const Mat& a = bp.a;
  const Vec v = x - z;
  CHECK((v - a.transpose() * (a * v)).norm() <= 1e-8);
}

TEST_CASE("empirical Lipschitz bound for the PGM residual") {
  const SmallLasso p = small_lasso_with_oracle_solution(9);
  const double bound =
      1.0 + p.system.step() * SmoothFn::quadratic(p.a, p.b, p.c).hessian_lambda_max() + 1e-6;
  Rng rng(46);
  for (int s = 0; s < 200; ++s) {
    const Vec x = random_vec(rng, 5, 3.0);
    const Vec y = random_vec(rng, 5, 3.0);
    if ((x - y).norm() == 0.0) continue;
    const double ratio = (p.system.eval(x) - p.system.eval(y)).norm() / (x - y).norm();
    CHECK(ratio <= bound);
  }
}

TEST_CASE("enumerated residual Jacobians realize the boundary case table") {
  const SmoothFn f = SmoothFn::quadratic(Mat::Identity(2, 2), Vec::Zero(2), Vec::Zero(2));
  const double t = 0.5, lambda = 1.0;
  const ResidualSystem sys = ResidualSystem::pgm(f, ProxFn::l1(2, lambda), t);
  // prox argument u = 0.5 x; boundary at |u_0| = 0.5 => x_0 = 1
  Vec x(2);
  x << 1.0, 4.0;
  const auto els = sys.bjacobian_enumerate(x);
  REQUIRE(els.size() == 2);
  const Mat i2 = Mat::Identity(2, 2);
  Mat m0 = Mat::Zero(2, 2);
  m0(1, 1) = 1.0;
  Mat m1 = i2;
  const Mat j0 = i2 - m0 * (i2 - t * i2);
  const Mat j1 = i2 - m1 * (i2 - t * i2);
  CHECK((els[0].j - j0).norm() <= 1e-15);
  CHECK((els[1].j - j1).norm() <= 1e-15);
  CHECK(els[0].boundary == std::vector<Index>{0});
}
