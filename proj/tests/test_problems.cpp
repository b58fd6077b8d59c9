#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ssnkit/diagnostics.hpp"
#include "ssnkit/problems.hpp"
#include "ssnkit/solver.hpp"

using namespace ssnkit;

TEST_CASE("generators are bitwise reproducible and seed-sensitive") {
  const ProblemInstance a = gen_lasso_dup(16, 32, 0.15, 1e-2, 42);
  const ProblemInstance b = gen_lasso_dup(16, 32, 0.15, 1e-2, 42);
  CHECK(std::memcmp(a.a.data(), b.a.data(), sizeof(double) * a.a.size()) == 0);
  CHECK(std::memcmp(a.b.data(), b.b.data(), sizeof(double) * a.b.size()) == 0);
  CHECK(a.dup_i1 == b.dup_i1);

  const ProblemInstance c = gen_lasso_dup(16, 32, 0.15, 1e-2, 43);
  CHECK(std::memcmp(a.a.data(), c.a.data(), sizeof(double) * a.a.size()) != 0);
}

TEST_CASE("duplicated columns are exact, b consistent with the truth") {
  for (std::uint64_t seed : {1ULL, 7ULL, 19ULL}) {
    const ProblemInstance inst = gen_lasso_dup(16, 32, 0.15, 1e-2, seed);
    CHECK((inst.a.col(inst.dup_i1) - inst.a.col(inst.dup_i2)).norm() == 0.0);
    CHECK((inst.b - inst.a * inst.u_truth).norm() == 0.0);
    // duplicated indices are the first two support entries of the truth
    CHECK(inst.u_truth[inst.dup_i1] != 0.0);
    CHECK(inst.u_truth[inst.dup_i2] != 0.0);
  }
}

TEST_CASE("degenerate generator parameters are rejected") {
  CHECK_THROWS_AS(gen_lasso_dup(32, 16, 0.1, 1e-2, 1), std::invalid_argument);   // m >= n
  CHECK_THROWS_AS(gen_lasso_dup(16, 32, 0.01, 1e-2, 1), std::invalid_argument);  // < 2 support
  CHECK_THROWS_AS(gen_lasso_dup(16, 32, 0.1, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_no_sc_lasso(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_small_enum(7, 1), std::invalid_argument);
}

TEST_CASE("solved lasso-dup: singular S-submatrix Gram, swap invariance") {
  const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-2, 2);
  const ResidualSystem sys = inst.pgm_system();
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  const SolveTrace tr = ssn_solve(sys, x0, SolverConfig{});
  REQUIRE(tr.final_residual() <= 1e-10);
  const Vec& xs = tr.x_final;

  const Vec grad = inst.smooth().gradient(xs);
  const SupportInfo si = support_info(xs, grad, inst.lambda, DiagnosticsConfig{});
  Mat as(32, si.s.size());
  for (std::size_t j = 0; j < si.s.size(); ++j) as.col(j) = inst.a.col(si.s[j]);
  Eigen::SelfAdjointEigenSolver<Mat> es(as.transpose() * as, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() <= 1e-8);

  // swapping the duplicated coordinates yields another residual root
  Vec swapped = xs;
  std::swap(swapped[inst.dup_i1], swapped[inst.dup_i2]);
  CHECK(sys.eval(swapped).norm() <= 1e-10);
}

TEST_CASE("basis pursuit generator: orthonormal rows, dual recovery, SC pattern") {
  const ProblemInstance inst = gen_basis_pursuit_dup(24, 48, 0.1, 4);
  const Mat gram = inst.a * inst.a.transpose();
  CHECK((gram - Mat::Identity(24, 24)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((inst.a.col(inst.dup_i1) - inst.a.col(inst.dup_i2)).norm() == 0.0);

  const ResidualSystem sys = inst.drs_system();
  Vec z = Vec::Zero(48);
  for (int s = 0; s < 2000 && sys.eval(z).norm() > 5e-3; ++s) z = sys.drs_step(z).z;
  const SolveTrace tr = ssn_solve(sys, z, SolverConfig{});
  REQUIRE(tr.final_residual() <= 1e-10);

  const Vec zs = tr.x_final;
  const Vec xs = inst.l1_part().prox(sys.step(), zs);
  CHECK((inst.a * xs - inst.b).norm() <= 1e-10);  // primal feasibility

  const Vec ys = inst.a * (xs - zs) / sys.step();  // dual recovery
  const Vec aty = inst.a.transpose() * ys;
  CHECK(aty.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);

  // Exactly one of {x_i, 1 - |A^T y|_i} vanishes per coordinate
  for (Index i = 0; i < 48; ++i) {
    const bool x_zero = std::fabs(xs[i]) <= 1e-7;
    const bool gap_zero = std::fabs(1.0 - std::fabs(aty[i])) <= 1e-6;
    CHECK(x_zero != gap_zero);
  }
}

TEST_CASE("no-SC construction: certified stationary point, SC fails exactly at i0") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ProblemInstance inst = gen_no_sc_lasso(15, seed);
    const ResidualSystem sys = inst.pgm_system();
    REQUIRE(inst.xstar.has_value());
    CHECK(sys.eval(*inst.xstar).norm() <= 1e-12);

    const Vec grad = inst.smooth().gradient(*inst.xstar);
    CHECK(std::fabs(std::fabs(grad[inst.no_sc_coord]) - inst.lambda) <= 1e-12);
    CHECK((*inst.xstar)[inst.no_sc_coord] == 0.0);

    const ScResult sc = sc_check(sys, *inst.xstar);
    CHECK_FALSE(sc.holds);
    CHECK(std::fabs(sc.gap) <= 1e-10);
  }
}

TEST_CASE("small-enum instances are stationary with sane structure") {
  int boundary_count = 0, deficient_count = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const ProblemInstance inst = gen_small_enum(3 + (seed % 4), seed);
    const ResidualSystem sys = inst.pgm_system();
    CHECK(sys.eval(*inst.xstar).norm() <= 1e-12);
    if (inst.rank_deficient) ++deficient_count;
    const Vec grad = inst.smooth().gradient(*inst.xstar);
    const SupportInfo si = support_info(*inst.xstar, grad, inst.lambda, DiagnosticsConfig{});
    if (!si.t2.empty()) ++boundary_count;
  }
  CHECK(boundary_count > 5);   // the coin flips actually populate T2
  CHECK(deficient_count > 3);
}

TEST_CASE("default step respects the PGM bound") {
  const ProblemInstance inst = gen_lasso_dup(16, 32, 0.15, 1e-2, 6);
  const double t = inst.default_step_pgm();
  const double lmax = inst.smooth().hessian_lambda_max();
  CHECK(t * lmax < 1.0);
  CHECK(t * lmax > 0.9);  // power iteration close to the true extreme
  CHECK_NOTHROW(inst.pgm_system());
}

TEST_CASE("lasso path warm start hands off near the sparse path") {
  const ProblemInstance inst = gen_lasso_dup(32, 64, 0.1, 1e-2, 9);
  const ResidualSystem sys = inst.pgm_system();
  const Vec x0 = lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  const double res = sys.eval(x0).norm();
  CHECK(res < 1e-2);
  // the handoff active set is near the solution support, far from dense
  const Vec u = sys.prox_argument(x0);
  Index act = 0;
  for (Index i = 0; i < 64; ++i)
    if (std::fabs(u[i]) > sys.step() * inst.lambda) ++act;
  CHECK(act <= 32);
}
