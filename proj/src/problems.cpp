#include "ssnkit/problems.hpp"

#include <algorithm>
#include <cmath>

#include "ssnkit/kernels.hpp"
#include "ssnkit/rng.hpp"

namespace ssnkit {

namespace {

// Stream ids per generator stage; bumping the retry offset re-derives a
// fresh substream without touching the others.
enum Stream : std::uint64_t { kStreamMatrix = 1, kStreamTruth = 2, kStreamAux = 3 };

void fill_gaussian(Mat& a, Rng& rng) {
  // column-major fill order, part of the pinned stream layout
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
}

std::vector<Index> draw_support(Index n, Index k, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> s(pool.begin(), pool.begin() + k);
  std::sort(s.begin(), s.end());
  return s;
}

double power_lambda_max(const Mat& h, int iters = 100) {
  if (h.rows() == 0) return 0.0;
  Vec v = Vec::Ones(h.rows());
  v /= v.norm();
  for (int i = 0; i < iters; ++i) {
    Vec w = h * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
  }
  return v.dot(h * v);
}

// Random matrix with prescribed singular values (U diag(s) V^T from
// Householder QR of Gaussian draws).
Mat shaped_matrix(Index rows, Index cols, const Vec& sigma, Rng& rng) {
  Mat gu(rows, sigma.size());
  fill_gaussian(gu, rng);
  const Mat u = Eigen::HouseholderQR<Mat>(gu).householderQ() * Mat::Identity(rows, sigma.size());
  Mat gv(cols, sigma.size());
  fill_gaussian(gv, rng);
  const Mat v = Eigen::HouseholderQR<Mat>(gv).householderQ() * Mat::Identity(cols, sigma.size());
  return u * sigma.asDiagonal() * v.transpose();
}

Vec log_spaced(Index k, double lo, double hi) {
  Vec s(k);
  if (k == 1) {
    s[0] = hi;
    return s;
  }
  for (Index i = 0; i < k; ++i)
    s[i] = hi * std::pow(lo / hi, static_cast<double>(i) / static_cast<double>(k - 1));
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// SegmentOracle

SegmentOracle SegmentOracle::from_solution(const Vec& xstar, Index i1, Index i2) {
  require(i1 >= 0 && i2 >= 0 && i1 < xstar.size() && i2 < xstar.size() && i1 != i2,
          "segment oracle: bad duplicate indices");
  SegmentOracle o;
  o.i1 = i1;
  o.i2 = i2;
  o.coord_sum = xstar[i1] + xstar[i2];
  o.abs_sum = std::fabs(xstar[i1]) + std::fabs(xstar[i2]);
  o.base = xstar;
  return o;
}

namespace {

// Projection of (a, b) onto {(p, q) : p + q = s, |p| + |q| = w}. For
// w == |s| this is the segment from (s, 0) to (0, s); for w > |s| the set is
// the two points {((s+w)/2, (s-w)/2), ((s-w)/2, (s+w)/2)}.
std::pair<double, double> project_pair(double a, double b, double s, double w) {
  if (w <= std::fabs(s) + 1e-15) {
    // clamp the segment parametrization p = theta, q = s - theta,
    // theta between 0 and s
    const double lo = std::min(0.0, s), hi = std::max(0.0, s);
    const double theta = std::clamp(0.5 * (a - b + s), lo, hi);
    return {theta, s - theta};
  }
  const double p1 = 0.5 * (s + w), q1 = 0.5 * (s - w);
  const double d1 = (a - p1) * (a - p1) + (b - q1) * (b - q1);
  const double d2 = (a - q1) * (a - q1) + (b - p1) * (b - p1);
  return d1 <= d2 ? std::make_pair(p1, q1) : std::make_pair(q1, p1);
}

}  // namespace

Vec SegmentOracle::project(const Vec& x) const {
  require_dim(x, base.size(), "segment oracle");
  Vec p = base;
  for (Index i = 0; i < x.size(); ++i)
    if (i != i1 && i != i2) p[i] = base[i];
  const auto [pa, pb] = project_pair(x[i1], x[i2], coord_sum, abs_sum);
  p[i1] = pa;
  p[i2] = pb;
  return p;
}

double SegmentOracle::distance(const Vec& x) const {
  return (x - project(x)).norm();
}

// ---------------------------------------------------------------------------
// ProblemInstance

SmoothFn ProblemInstance::smooth() const {
  require(kind != Kind::BasisPursuitDup, "basis pursuit has no smooth part");
  return SmoothFn::quadratic(a, b, c);
}

ProxFn ProblemInstance::l1_part() const { return ProxFn::l1(n, lambda); }

ProxFn ProblemInstance::affine_part() const {
  require(kind == Kind::BasisPursuitDup, "affine part: basis pursuit instances only");
  return ProxFn::affine_indicator(a, b);
}

double ProblemInstance::default_step_pgm() const {
  const double lmax = power_lambda_max(a.transpose() * a);
  require(lmax > 0.0, "default step: zero Hessian");
  return 0.95 / lmax;
}

ResidualSystem ProblemInstance::pgm_system(std::optional<double> t) const {
  return ResidualSystem::pgm(smooth(), l1_part(), t.value_or(default_step_pgm()));
}

ResidualSystem ProblemInstance::drs_system(std::optional<double> t) const {
  return ResidualSystem::drs(affine_part(), l1_part(), t.value_or(kDefaultStepDrs));
}

ResidualSystem ProblemInstance::alm_system(Vec z, std::optional<double> t) const {
  return ResidualSystem::alm(smooth(), l1_part(), t.value_or(default_step_pgm()), std::move(z));
}

SegmentOracle ProblemInstance::segment_oracle(const Vec& solved_x) const {
  require(dup_i1 >= 0, "segment oracle: instance has no duplicated pair");
  return SegmentOracle::from_solution(solved_x, dup_i1, dup_i2);
}

std::string ProblemInstance::kind_name(Kind k) {
  switch (k) {
    case Kind::LassoDup: return "lasso-dup";
    case Kind::BasisPursuitDup: return "basis-pursuit-dup";
    case Kind::NoScLasso: return "no-sc-lasso";
    case Kind::SmallEnum: return "small-enum";
  }
  return "?";
}

ProblemInstance::Kind ProblemInstance::kind_from_name(const std::string& name) {
  if (name == "lasso-dup") return Kind::LassoDup;
  if (name == "basis-pursuit-dup") return Kind::BasisPursuitDup;
  if (name == "no-sc-lasso") return Kind::NoScLasso;
  if (name == "small-enum") return Kind::SmallEnum;
  throw std::invalid_argument("unknown problem kind: " + name);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

struct SparseTruth {
  std::vector<Index> support;
  Vec u;
};

SparseTruth draw_truth(Index n, Index k, std::uint64_t seed) {
  // bounded retries with fresh substreams when a support value is
  // numerically too small to count as "nonzero"
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    Rng rng(seed, kStreamTruth + 16 * attempt);
    SparseTruth st;
    st.support = draw_support(n, k, rng);
    st.u = Vec::Zero(n);
    bool ok = true;
    for (Index i : st.support) {
      st.u[i] = rng.normal();
      if (std::fabs(st.u[i]) < 1e-6) ok = false;
    }
    if (ok) return st;
  }
  throw std::runtime_error("draw_truth: retries exhausted");
}

}  // namespace

ProblemInstance gen_lasso_dup(Index m, Index n, double density, double lambda,
                              std::uint64_t seed) {
  require(m < n, "gen_lasso_dup: requires m < n");
  require(density > 0.0 && density < 1.0, "gen_lasso_dup: density must lie in (0,1)");
  require(lambda > 0.0, "gen_lasso_dup: lambda must be positive");
  const Index k = static_cast<Index>(std::llround(density * static_cast<double>(n)));
  require(k >= 2, "gen_lasso_dup: density yields fewer than 2 support entries");

  ProblemInstance inst;
  inst.kind = ProblemInstance::Kind::LassoDup;
  inst.m = m;
  inst.n = n;
  inst.density = density;
  inst.lambda = lambda;
  inst.seed = seed;

  Rng rng(seed, kStreamMatrix);
  inst.a.resize(m, n);
  fill_gaussian(inst.a, rng);

  const SparseTruth st = draw_truth(n, k, seed);
  inst.u_truth = st.u;
  inst.dup_i1 = st.support[0];
  inst.dup_i2 = st.support[1];
  inst.a.col(inst.dup_i1) = inst.a.col(inst.dup_i2);

  inst.b = inst.a * inst.u_truth;
  inst.c = Vec::Zero(n);
  return inst;
}

ProblemInstance gen_basis_pursuit_dup(Index m, Index n, double density, std::uint64_t seed) {
  ProblemInstance inst = gen_lasso_dup(m, n, density, 1.0, seed);
  inst.kind = ProblemInstance::Kind::BasisPursuitDup;

  // orthonormalize the rows: thin QR of A^T, A <- Q^T
  Eigen::HouseholderQR<Mat> qr(inst.a.transpose());
  const Mat q = qr.householderQ() * Mat::Identity(n, m);
  inst.a = q.transpose();
  // re-pin the duplicate exactly (QR leaves it equal only to rounding)
  inst.a.col(inst.dup_i1) = inst.a.col(inst.dup_i2);
  inst.b = inst.a * inst.u_truth;
  return inst;
}

ProblemInstance gen_no_sc_lasso(Index n, std::uint64_t seed) {
  require(n >= 3, "gen_no_sc_lasso: n must be at least 3");

  ProblemInstance inst;
  inst.kind = ProblemInstance::Kind::NoScLasso;
  inst.m = n;
  inst.n = n;
  inst.lambda = 0.1;
  inst.seed = seed;

  const Index k = std::max<Index>(2, (n + 2) / 3);
  Rng rng(seed, kStreamMatrix);
  const std::vector<Index> support = draw_support(n, k, rng);
  std::vector<Index> off;
  for (Index i = 0; i < n; ++i)
    if (!std::binary_search(support.begin(), support.end(), i)) off.push_back(i);
  const Index i0 = off[rng.below(off.size())];

  // support block with log-spaced spectrum; kappa(A_S) ~ 6 keeps the Newton
  // tail long enough to be measurable
  const Mat a_s = shaped_matrix(n, k, log_spaced(k, 1.0 / 6.0, 1.0), rng);
  inst.a = Mat::Zero(n, n);
  for (Index j = 0; j < k; ++j) inst.a.col(support[static_cast<std::size_t>(j)]) = a_s.col(j);

  // column i0 orthogonal to the support block: grad f at i0 is then constant
  // on the support manifold and the prox argument sits exactly on the kink
  {
    Vec g(n);
    for (Index i = 0; i < n; ++i) g[i] = rng.normal();
    Vec w = g - a_s * (a_s.transpose() * a_s).ldlt().solve(a_s.transpose() * g);
    w /= w.norm();
    inst.a.col(i0) = std::sqrt(0.3) * w;
  }
  for (Index i : off) {
    if (i == i0) continue;
    Vec g(n);
    for (Index j = 0; j < n; ++j) g[j] = rng.normal();
    inst.a.col(i) = 0.8 * g / g.norm();
  }

  Vec xs = Vec::Zero(n);
  for (Index i : support) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    xs[i] = sign * (0.5 + rng.uniform());
  }

  // b = A x* makes grad f(x*) = c; assign the gradient pattern directly
  inst.b = inst.a * xs;
  Vec g = Vec::Zero(n);
  for (Index i : support) g[i] = -inst.lambda * (xs[i] > 0.0 ? 1.0 : -1.0);
  g[i0] = inst.lambda;
  for (Index i : off)
    if (i != i0) g[i] = inst.lambda * rng.uniform(-0.5, 0.5);
  inst.c = g;
  inst.u_truth = xs;
  inst.xstar = xs;
  inst.no_sc_coord = i0;
  return inst;
}

ProblemInstance gen_small_enum(Index n, std::uint64_t seed) {
  require(n >= 3 && n <= 6, "gen_small_enum: n must lie in [3,6]");

  ProblemInstance inst;
  inst.kind = ProblemInstance::Kind::SmallEnum;
  inst.m = n;
  inst.n = n;
  inst.lambda = 1.0;
  inst.seed = seed;

  Rng rng(seed, kStreamMatrix);
  inst.rank_deficient = rng.uniform() < 1.0 / 3.0;
  const bool force_boundary = rng.uniform() < 0.5;

  const Index min_support = inst.rank_deficient ? 2 : 1;
  const Index max_support = n - 1;  // keep at least one zero coordinate
  const Index k = min_support + static_cast<Index>(rng.below(
                                    static_cast<std::uint64_t>(max_support - min_support + 1)));
  const std::vector<Index> support = draw_support(n, k, rng);
  std::vector<Index> off;
  for (Index i = 0; i < n; ++i)
    if (!std::binary_search(support.begin(), support.end(), i)) off.push_back(i);

  inst.a = shaped_matrix(n, n, log_spaced(n, 0.6, 1.4), rng);
  if (inst.rank_deficient) {
    // exact deficiency intersecting T: duplicate one support column
    inst.dup_i1 = support[0];
    inst.dup_i2 = support[1];
    inst.a.col(inst.dup_i1) = inst.a.col(inst.dup_i2);
  }

  Vec xs = Vec::Zero(n);
  for (Index i : support) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    xs[i] = sign * (0.5 + rng.uniform());
  }

  inst.b = inst.a * xs;
  Vec g = Vec::Zero(n);
  for (Index i : support) g[i] = -inst.lambda * (xs[i] > 0.0 ? 1.0 : -1.0);
  Index boundary_at = -1;
  if (force_boundary) {
    boundary_at = off[rng.below(off.size())];
    g[boundary_at] = rng.uniform() < 0.5 ? inst.lambda : -inst.lambda;
  }
  for (Index i : off)
    if (i != boundary_at) g[i] = inst.lambda * rng.uniform(-0.4, 0.4);
  inst.c = g;
  inst.u_truth = xs;
  inst.xstar = xs;
  return inst;
}

Vec lasso_path_warm_start(const SmoothFn& f, double lambda, double t,
                          const LassoPathConfig& cfg) {
  require(f.kind() == SmoothFn::Kind::Quadratic, "lasso warm start: quadratic f required");
  require(lambda > 0.0 && t > 0.0, "lasso warm start: lambda and t must be positive");
  const Index n = f.dim();
  const double l0 = 0.95 * f.gradient(Vec::Zero(n)).cwiseAbs().maxCoeff();
  const double lend = cfg.final_mult * lambda;
  Vec x = Vec::Zero(n);
  if (!(l0 > lend)) return x;  // already below the path start
  int used = 0;
  for (int s = 0; s < cfg.stages; ++s) {
    const double ls = l0 * std::pow(lend / l0, double(s + 1) / cfg.stages);
    const ProxFn h = ProxFn::l1(n, ls);
    const int per = (cfg.budget - used) / (cfg.stages - s);
    Vec y = x;
    double tk = 1.0;
    for (int it = 0; it < per && used < cfg.budget; ++it, ++used) {
      // one prox-gradient step at the extrapolated point, Nesterov momentum
      const Vec g = f.gradient(y);
      Vec u(n);
      kernels::axpby(1.0, y.data(), -t, g.data(), u.data(), n);
      const Vec xn = h.prox(t, u);
      const double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = xn + ((tk - 1.0) / tk1) * (xn - x);
      // stage residual; unused budget rolls into later stages
      const Vec gs = f.gradient(xn);
      Vec us(n);
      kernels::axpby(1.0, xn.data(), -t, gs.data(), us.data(), n);
      const double stage_res = (xn - h.prox(t, us)).norm();
      x = xn;
      tk = tk1;
      if (stage_res <= cfg.stage_eta * t * ls) break;
    }
  }
  return x;
}

}  // namespace ssnkit
