// Command-line harness: generate instances, run solvers, run diagnostics,
// emit traces and plot data. `solve --experiment lasso-dup` and
// `solve --experiment basis-pursuit-dup` reproduce the two benchmark
// experiments end-to-end.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssnkit/diagnostics.hpp"
#include "ssnkit/rng.hpp"
#include "ssnkit/problems.hpp"
#include "ssnkit/serialize.hpp"
#include "ssnkit/solver.hpp"

using namespace ssnkit;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError("unknown field \"" + key + "\" in " + where);
  }
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
  // problem: either a generator spec or an instance file
  std::string generator;  // empty when instance_file used
  Index m = 64, n = 128;
  double density = 0.1;
  double lambda = 1e-3;
  std::uint64_t seed = 1;
  std::string instance_file;

  std::string residual = "pgm";
  std::optional<double> step_t;
  std::optional<Vec> alm_z;
  SolverConfig solver;
  std::string warm_start = "auto";  // auto | none
  std::optional<std::vector<Index>> manifold_support;
  std::string out_dir = "out";

  json to_json(double resolved_t) const;
  static ExperimentConfig from_json(const json& j);
};

json ExperimentConfig::to_json(double resolved_t) const {
  json j;
  j["version"] = kToolVersion;
  j["prng"] = kPrngId;
  if (!instance_file.empty()) {
    j["problem"] = {{"instance_file", instance_file}};
  } else {
    j["problem"] = {{"generator", generator}, {"m", m},      {"n", n},
                    {"density", density},     {"lambda", lambda}, {"seed", seed}};
  }
  j["residual"] = residual;
  j["step_t"] = resolved_t;
  if (alm_z) j["alm_z"] = encode_vector(*alm_z);
  j["solver"] = {
      {"max_iters", solver.max_iters},
      {"tol_residual", solver.tol_residual},
      {"inexact_l3", solver.inexact_l3},
      {"inexact_q", solver.inexact_q},
      {"linear_solver", solver.linear_solver == LinearSolverKind::Direct ? "direct" : "iterative"},
      {"globalization",
       solver.globalization == GlobalizationKind::ResidualDecrease ? "residual-decrease" : "none"},
      {"nu", solver.nu},
      {"tie_rule",
       solver.tie_rule == TieRule::ZeroOnBoundary ? "zero-on-boundary" : "one-on-boundary"},
      {"boundary_tol", solver.boundary_tol},
      {"seed", solver.seed},
      {"store_iterates", solver.store_iterates}};
  j["warm_start"] = warm_start;
  if (manifold_support) j["manifold_support"] = *manifold_support;
  j["out_dir"] = out_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown_fields(j, {"version", "prng", "problem", "residual", "step_t", "alm_z",
                            "solver", "warm_start", "manifold_support", "out_dir"},
                        "config");
  ExperimentConfig c;
  const json& p = j.at("problem");
  if (p.contains("instance_file")) {
    reject_unknown_fields(p, {"instance_file"}, "problem");
    c.instance_file = p.at("instance_file").get<std::string>();
  } else {
    reject_unknown_fields(p, {"generator", "m", "n", "density", "lambda", "seed"}, "problem");
    c.generator = p.at("generator").get<std::string>();
    if (p.contains("m")) c.m = p.at("m").get<Index>();
    if (p.contains("n")) c.n = p.at("n").get<Index>();
    if (p.contains("density")) c.density = p.at("density").get<double>();
    if (p.contains("lambda")) c.lambda = p.at("lambda").get<double>();
    if (p.contains("seed")) c.seed = p.at("seed").get<std::uint64_t>();
  }
  if (j.contains("residual")) c.residual = j.at("residual").get<std::string>();
  if (j.contains("step_t") && !j.at("step_t").is_null())
    c.step_t = j.at("step_t").get<double>();
  if (j.contains("alm_z") && !j.at("alm_z").is_null()) {
    const std::string b64 = j.at("alm_z").get<std::string>();
    c.alm_z = decode_vector(b64, static_cast<Index>(base64_decode(b64).size() / 8));
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown_fields(s,
                          {"max_iters", "tol_residual", "inexact_l3", "inexact_q",
                           "linear_solver", "globalization", "nu", "tie_rule", "boundary_tol",
                           "seed", "store_iterates"},
                          "solver");
    if (s.contains("max_iters")) c.solver.max_iters = s.at("max_iters").get<int>();
    if (s.contains("tol_residual")) c.solver.tol_residual = s.at("tol_residual").get<double>();
    if (s.contains("inexact_l3")) c.solver.inexact_l3 = s.at("inexact_l3").get<double>();
    if (s.contains("inexact_q")) c.solver.inexact_q = s.at("inexact_q").get<double>();
    if (s.contains("linear_solver")) {
      const std::string v = s.at("linear_solver").get<std::string>();
      if (v == "direct") c.solver.linear_solver = LinearSolverKind::Direct;
      else if (v == "iterative") c.solver.linear_solver = LinearSolverKind::Iterative;
      else throw ConfigError("solver.linear_solver must be \"direct\" or \"iterative\"");
    }
    if (s.contains("globalization")) {
      const std::string v = s.at("globalization").get<std::string>();
      if (v == "residual-decrease") c.solver.globalization = GlobalizationKind::ResidualDecrease;
      else if (v == "none") c.solver.globalization = GlobalizationKind::None;
      else throw ConfigError("solver.globalization must be \"residual-decrease\" or \"none\"");
    }
    if (s.contains("nu")) c.solver.nu = s.at("nu").get<double>();
    if (s.contains("tie_rule")) {
      const std::string v = s.at("tie_rule").get<std::string>();
      if (v == "zero-on-boundary") c.solver.tie_rule = TieRule::ZeroOnBoundary;
      else if (v == "one-on-boundary") c.solver.tie_rule = TieRule::OneOnBoundary;
      else throw ConfigError("solver.tie_rule must be \"zero-on-boundary\" or \"one-on-boundary\"");
    }
    if (s.contains("boundary_tol")) c.solver.boundary_tol = s.at("boundary_tol").get<double>();
    if (s.contains("seed")) c.solver.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("store_iterates")) c.solver.store_iterates = s.at("store_iterates").get<bool>();
  }
  if (j.contains("warm_start")) c.warm_start = j.at("warm_start").get<std::string>();
  if (j.contains("manifold_support") && !j.at("manifold_support").is_null())
    c.manifold_support = j.at("manifold_support").get<std::vector<Index>>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  return c;
}

ProblemInstance make_instance(const ExperimentConfig& c) {
  if (!c.instance_file.empty()) return load_instance(c.instance_file);
  if (c.generator == "lasso-dup") return gen_lasso_dup(c.m, c.n, c.density, c.lambda, c.seed);
  if (c.generator == "basis-pursuit-dup")
    return gen_basis_pursuit_dup(c.m, c.n, c.density, c.seed);
  if (c.generator == "no-sc-lasso") return gen_no_sc_lasso(c.n, c.seed);
  if (c.generator == "small-enum") return gen_small_enum(c.n, c.seed);
  throw ConfigError("unknown generator \"" + c.generator +
                    "\" (expected lasso-dup, basis-pursuit-dup, no-sc-lasso, small-enum)");
}

ResidualSystem make_system(const ProblemInstance& inst, const ExperimentConfig& c,
                           double& resolved_t) {
  if (c.residual == "pgm") {
    resolved_t = c.step_t.value_or(inst.default_step_pgm());
    return ResidualSystem::pgm(inst.smooth(), inst.l1_part(), resolved_t);
  }
  if (c.residual == "drs") {
    if (inst.kind != ProblemInstance::Kind::BasisPursuitDup)
      throw ConfigError("residual \"drs\" needs a basis-pursuit instance (f carried as a prox)");
    resolved_t = c.step_t.value_or(ProblemInstance::kDefaultStepDrs);
    return ResidualSystem::drs(inst.affine_part(), inst.l1_part(), resolved_t);
  }
  if (c.residual == "alm") {
    resolved_t = c.step_t.value_or(inst.default_step_pgm());
    Vec z = c.alm_z.value_or(Vec::Zero(inst.n));
    require_dim(z, inst.n, "alm_z");
    return ResidualSystem::alm(inst.smooth(), inst.l1_part(), resolved_t, std::move(z));
  }
  throw ConfigError("unknown residual \"" + c.residual + "\" (expected pgm, drs, alm)");
}

Vec make_warm_start(const ProblemInstance& inst, const ResidualSystem& sys,
                    const ExperimentConfig& c) {
  if (c.warm_start == "none") return Vec::Zero(sys.dim());
  if (c.warm_start != "auto")
    throw ConfigError("warm_start must be \"auto\" or \"none\"");
  if (sys.kind() == ResidualSystem::Kind::DRS)
    return warm_start_first_order(sys, Vec::Zero(sys.dim()), 500, 5e-3);
  if (inst.kind == ProblemInstance::Kind::LassoDup ||
      inst.kind == ProblemInstance::Kind::SmallEnum ||
      inst.kind == ProblemInstance::Kind::NoScLasso)
    return lasso_path_warm_start(inst.smooth(), inst.lambda, sys.step());
  return warm_start_first_order(sys, Vec::Zero(sys.dim()), 200, 5e-3);
}

// ---------------------------------------------------------------------------
// solve

void write_plot_files(const std::filesystem::path& dir, const SolveTrace& trace,
                      const ProblemInstance& inst, const ResidualSystem& sys) {
  {
    std::ostringstream os;
    os << "# " << kToolVersion << ", prng=" << kPrngId << ", seed=" << inst.seed << "\n";
    os << "k,log10_resF\n";
    for (const auto& r : trace.rows)
      os << r.k << ',' << fmt(r.res_f > 0 ? std::log10(r.res_f) : -18.0) << "\n";
    write_file((dir / "plot_residual.csv").string(), os.str());
  }
  const Vec x = sys.kind() == ResidualSystem::Kind::DRS
                    ? sys.prox_h().prox(sys.step(), trace.x_final)
                    : trace.x_final;
  {
    std::ostringstream os;
    os << "# solution stem data\n";
    os << "i,x_i\n";
    for (Index i = 0; i < x.size(); ++i) os << i << ',' << fmt(x[i]) << "\n";
    write_file((dir / "plot_solution.csv").string(), os.str());
  }
  if (sys.kind() == ResidualSystem::Kind::DRS) {
    // 1 - |A^T y*| stem (dual gap per coordinate)
    const Mat& a = sys.prox_f().affine_a();
    const Vec y = a * (x - trace.x_final) / sys.step();
    const Vec aty = a.transpose() * y;
    std::ostringstream os;
    os << "# dual gap stem data\n";
    os << "i,one_minus_abs_aty,x_nonzero\n";
    for (Index i = 0; i < x.size(); ++i)
      os << i << ',' << fmt(1.0 - std::fabs(aty[i])) << ','
         << (std::fabs(x[i]) > 1e-7 ? 1 : 0) << "\n";
    write_file((dir / "plot_dualgap.csv").string(), os.str());
  } else {
    // SC gap stem: lambda - |grad f|_i per coordinate
    const Vec g = inst.smooth().gradient(x);
    std::ostringstream os;
    os << "# sc gap stem data\n";
    os << "i,gap,x_nonzero\n";
    for (Index i = 0; i < x.size(); ++i)
      os << i << ',' << fmt(inst.lambda - std::fabs(g[i])) << ','
         << (std::fabs(x[i]) > 1e-7 ? 1 : 0) << "\n";
    write_file((dir / "plot_scgap.csv").string(), os.str());
  }
}

int cmd_solve(const ExperimentConfig& cfg) {
  cfg.solver.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemInstance inst = make_instance(cfg);
  double resolved_t = 0.0;
  const ResidualSystem sys = make_system(inst, cfg, resolved_t);
  const Vec x0 = make_warm_start(inst, sys, cfg);

  SolveTrace trace;
  if (cfg.manifold_support) {
    const SupportManifold m(*cfg.manifold_support, sys.dim());
    trace = projected_ssn_solve(sys, m, x0, cfg.solver);
  } else {
    trace = ssn_solve(sys, x0, cfg.solver);
  }
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  write_file((dir / "resolved_config.json").string(), cfg.to_json(resolved_t).dump(2));
  write_file((dir / "trace.csv").string(), trace_to_csv(trace, inst.seed));
  write_file((dir / "trace.json").string(), trace_to_json(trace, inst.seed));

  const RateEstimate rate = rate_estimate(trace);
  json summary;
  summary["version"] = kToolVersion;
  summary["prng"] = kPrngId;
  summary["seed"] = inst.seed;
  summary["status"] = status_name(trace.status);
  summary["iterations"] = trace.iterations();
  summary["terminal_residual"] = trace.final_residual();
  summary["q_hat"] = rate.q_hat;
  summary["superlinear"] = rate.superlinear;
  summary["rate_undetermined"] = rate.undetermined;
  summary["wall_time_s"] = wall_s;
  if (sys.kind() == ResidualSystem::Kind::DRS) {
    const Vec x = sys.prox_h().prox(sys.step(), trace.x_final);
    const Mat& a = sys.prox_f().affine_a();
    const Vec y = a * (x - trace.x_final) / sys.step();
    summary["dual_linf"] = (a.transpose() * y).cwiseAbs().maxCoeff();
    summary["primal_feasibility"] = (a * x - sys.prox_f().affine_b()).norm();
  }
  write_file((dir / "summary.json").string(), summary.dump(2));
  write_plot_files(dir, trace, inst, sys);

  std::cout << "status=" << status_name(trace.status)
            << " iterations=" << trace.iterations()
            << " residual=" << fmt(trace.final_residual())
            << " superlinear=" << (rate.superlinear ? "true" : "false") << "\n";
  return trace.status == TerminalStatus::Converged ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// diagnose

int cmd_diagnose(const ExperimentConfig& cfg, const std::string& point_file) {
  cfg.solver.validate();
  const ProblemInstance inst = make_instance(cfg);
  double resolved_t = 0.0;
  const ResidualSystem sys = make_system(inst, cfg, resolved_t);

  Vec point;
  if (!point_file.empty()) {
    point = load_vector(point_file);
    require_dim(point, sys.dim(), "diagnose point");
  } else {
    const Vec x0 = make_warm_start(inst, sys, cfg);
    point = ssn_solve(sys, x0, cfg.solver).x_final;
  }

  const DiagnosticsReport rep = diagnose(sys, point);
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  write_file((dir / "diagnostics.json").string(), report_to_json(rep));

  std::printf("%-22s %s\n", "check", "result");
  std::printf("%-22s %s (||F|| = %s)\n", "stationary",
              rep.stationary ? "yes" : "NO (stationarity violated)",
              fmt(rep.residual_norm).c_str());
  std::printf("%-22s %s (margin %s, %s, %d elements)\n", "bd_regular",
              verdict_name(rep.bd.verdict).c_str(), fmt(rep.bd.margin).c_str(),
              rep.bd.method.c_str(), rep.bd.elements_tested);
  if (rep.sc_evaluated)
    std::printf("%-22s %s (gap %s)\n", "strict_complementarity",
                rep.sc_holds ? "true" : "false", fmt(rep.sc_gap).c_str());
  else
    std::printf("%-22s skipped (not stationary)\n", "strict_complementarity");
  std::printf("%-22s %s\n", "invertibility_margin", fmt(rep.invertibility).c_str());
  if (rep.smoothness_evaluated)
    std::printf("%-22s %s (radius %s)\n", "smoothness_deviation",
                fmt(rep.smoothness_deviation).c_str(), fmt(rep.smoothness_radius).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify suites

json verify_prox_oracles() {
  // independent oracles with pinned seeds: candidate enumeration, radial
  // bisection, SVD projection; plus nonexpansiveness and 0 <= M <= I
  double max_dev = 0.0;
  bool ok = true;
  Rng rng(2028);
  const Index n = 8;
  Mat g(n, 3);
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(n, 3);
  const Mat a = q.transpose();
  Vec x0(n);
  for (Index i = 0; i < n; ++i) x0[i] = rng.normal();
  const Vec b = a * x0;

  const ProxFn fns[] = {ProxFn::l1(n, 0.7), ProxFn::l2norm(n), ProxFn::nonneg(n),
                        ProxFn::affine_indicator(a, b), ProxFn::zero(n)};
  for (const double t : {0.1, 1.0, 10.0}) {
    for (int s = 0; s < 200; ++s) {
      Vec y(n);
      for (Index i = 0; i < n; ++i) y[i] = 2.0 * rng.normal();
      for (const ProxFn& h : fns) {
        const Vec p = h.prox(t, y);
        Vec ref;
        switch (h.kind()) {
          case ProxFn::Kind::L1: {
            ref.resize(n);
            for (Index i = 0; i < n; ++i) {
              const double lo = y[i] - t * 0.7, hi = y[i] + t * 0.7;
              double best = 1e300, arg = 0.0;
              for (double cand : {lo, 0.0, hi}) {
                const double v =
                    0.7 * std::fabs(cand) + (cand - y[i]) * (cand - y[i]) / (2 * t);
                if (v < best) {
                  best = v;
                  arg = cand;
                }
              }
              ref[i] = arg;
            }
            break;
          }
          case ProxFn::Kind::L2Norm: {
            const double r = y.norm();
            double lo = 0.0, hi = r;
            if (1.0 + (0.0 - r) / t >= 0.0) hi = 0.0;
            for (int it = 0; it < 200; ++it) {
              const double mid = 0.5 * (lo + hi);
              (1.0 + (mid - r) / t < 0.0 ? lo : hi) = mid;
            }
            ref = r > 0 ? Vec((0.5 * (lo + hi) / r) * y) : Vec(Vec::Zero(n));
            break;
          }
          case ProxFn::Kind::NonnegIndicator:
            ref = y.cwiseMax(0.0);
            break;
          case ProxFn::Kind::AffineIndicator: {
            Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
            ref = y - svd.solve(a * y - b);
            break;
          }
          case ProxFn::Kind::ZeroFn:
            ref = y;
            break;
        }
        max_dev = std::max(max_dev, (p - ref).norm());
        Vec y2(n);
        for (Index i = 0; i < n; ++i) y2[i] = 2.0 * rng.normal();
        const Vec p2 = h.prox(t, y2);
        if ((p - p2).norm() > (y - y2).norm() + 1e-12) ok = false;
        const Mat mel = h.prox_bjacobian(t, y);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (mel + mel.transpose()),
                                              Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12 || es.eigenvalues().maxCoeff() > 1 + 1e-12)
          ok = false;
      }
    }
  }
  ok = ok && max_dev <= 1e-8;
  return json{{"suite", "prox-oracles"}, {"passed", ok}, {"max_deviation", max_dev}};
}

json verify_jacobians() {
  double worst = 0.0;
  Rng rng(2029);
  const ProblemInstance inst = gen_lasso_dup(8, 12, 0.2, 0.1, 3);
  const ResidualSystem pgm = inst.pgm_system();
  Vec z0(12);
  for (Index i = 0; i < 12; ++i) z0[i] = rng.normal();
  const ResidualSystem alm = inst.alm_system(z0);
  const ProblemInstance bp = gen_basis_pursuit_dup(6, 12, 0.25, 4);
  const ResidualSystem drs = bp.drs_system();
  const double fd_h = 1e-6;
  for (const ResidualSystem* sys : {&pgm, &alm, &drs}) {
    int checked = 0;
    while (checked < 200) {
      Vec x(12);
      for (Index i = 0; i < 12; ++i) x[i] = 2.0 * rng.normal();
      const Vec u = sys->prox_argument(x);
      if (sys->prox_h().nondiff_set_member(sys->step(), u, 50 * fd_h)) continue;
      const Mat j = sys->bjacobian(x).j;
      Mat fd(12, 12);
      Vec xp = x, xm = x;
      for (Index k = 0; k < 12; ++k) {
        xp[k] = x[k] + fd_h;
        xm[k] = x[k] - fd_h;
        fd.col(k) = (sys->eval(xp) - sys->eval(xm)) / (2 * fd_h);
        xp[k] = x[k];
        xm[k] = x[k];
      }
      worst = std::max(worst, (j - fd).norm() / (1.0 + j.norm()));
      ++checked;
    }
  }
  return json{{"suite", "jacobians"}, {"passed", worst <= 1e-5}, {"worst_relative", worst}};
}

json verify_bd_equivalence() {
  int agree = 0;
  const int total = 50;
  for (std::uint64_t seed = 1; seed <= total; ++seed) {
    const ProblemInstance inst = gen_small_enum(3 + (seed % 4), seed);
    const ResidualSystem sys = inst.pgm_system();
    const BdRegularity va = bd_regularity_pgm(sys, *inst.xstar);
    const BdRegularity vb = bd_regularity_enumerate(sys, *inst.xstar);
    if (va.verdict == vb.verdict) ++agree;
  }
  return json{{"suite", "bd-equivalence"},
              {"passed", agree == total},
              {"agree", agree},
              {"total", total}};
}

json verify_rates() {
  std::vector<double> geo, quad;
  for (int k = 0; k < 40; ++k) geo.push_back(std::pow(0.5, k));
  for (int k = 0; k <= 4; ++k) quad.push_back(std::pow(10.0, -std::pow(2.0, k)));
  const RateEstimate rg = rate_estimate(geo);
  const RateEstimate rq = rate_estimate(quad);
  const bool ok = !rg.undetermined && !rg.superlinear && std::fabs(rg.q_hat - 1.0) < 0.1 &&
                  !rq.undetermined && rq.superlinear && std::fabs(rq.q_hat - 2.0) < 0.05;
  return json{{"suite", "rates"},
              {"passed", ok},
              {"geometric", {{"q_hat", rg.q_hat}, {"superlinear", rg.superlinear}}},
              {"quadratic", {{"q_hat", rq.q_hat}, {"superlinear", rq.superlinear}}}};
}

int cmd_verify(const std::string& suite, const std::string& out_file) {
  json result;
  if (suite == "prox-oracles") result = verify_prox_oracles();
  else if (suite == "jacobians") result = verify_jacobians();
  else if (suite == "bd-equivalence") result = verify_bd_equivalence();
  else if (suite == "rates") result = verify_rates();
  else
    throw ConfigError("unknown suite \"" + suite +
                      "\" (expected prox-oracles, jacobians, bd-equivalence, rates)");
  const std::string text = result.dump(2);
  std::cout << text << "\n";
  if (!out_file.empty()) write_file(out_file, text);
  return result.at("passed").get<bool>() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semismooth Newton toolkit for composite optimization"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_file, point_file, suite, verify_out, gen_out;

  const auto add_problem_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file (overrides other flags)");
    cmd->add_option("--experiment", cfg.generator,
                    "generator: lasso-dup, basis-pursuit-dup, no-sc-lasso, small-enum");
    cmd->add_option("--instance", cfg.instance_file, "instance file path");
    cmd->add_option("--seed", cfg.seed, "generator seed");
    cmd->add_option("--m", cfg.m, "rows");
    cmd->add_option("--n", cfg.n, "columns");
    cmd->add_option("--density", cfg.density, "ground-truth density");
    cmd->add_option("--lambda", cfg.lambda, "l1 weight");
    cmd->add_option("--residual", cfg.residual, "residual system: pgm, drs, alm");
    cmd->add_option("--t",
                    [&cfg](const std::vector<std::string>& v) {
                      cfg.step_t = std::stod(v.at(0));
                      return true;
                    },
                    "step size t (default: rule per residual)");
    cmd->add_option("--tol", cfg.solver.tol_residual, "residual stopping tolerance");
    cmd->add_option("--max-iters", cfg.solver.max_iters, "iteration cap");
    cmd->add_option("--manifold-support",
                    [&cfg](const std::vector<std::string>& v) {
                      std::vector<Index> s;
                      std::stringstream ss(v.at(0));
                      std::string tok;
                      while (std::getline(ss, tok, ',')) s.push_back(std::stoll(tok));
                      cfg.manifold_support = std::move(s);
                      return true;
                    },
                    "projected solve support indices, comma separated");
    cmd->add_option("--warm-start", cfg.warm_start, "auto | none");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
  };

  CLI::App* solve = app.add_subcommand("solve", "run a solver, emit trace and plot data");
  add_problem_flags(solve);
  CLI::App* diagnose_cmd =
      app.add_subcommand("diagnose", "regularity verdicts at a candidate point");
  add_problem_flags(diagnose_cmd);
  diagnose_cmd->add_option("--point", point_file, "candidate point file (default: solve first)");
  CLI::App* verify = app.add_subcommand("verify", "run a pinned property suite");
  verify->add_option("suite", suite, "prox-oracles | jacobians | bd-equivalence | rates")
      ->required();
  verify->add_option("--out", verify_out, "write the machine-readable result here");
  CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
  add_problem_flags(gen);
  gen->add_option("--out", gen_out, "instance file path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (!config_file.empty()) {
      json j;
      try {
        j = json::parse(read_file(config_file));
      } catch (const json::parse_error& e) {
        std::cerr << "config parse error at byte " << e.byte << ": " << e.what() << "\n";
        return kExitConfigError;
      }
      cfg = ExperimentConfig::from_json(j);
    }
    if (solve->parsed()) return cmd_solve(cfg);
    if (diagnose_cmd->parsed()) return cmd_diagnose(cfg, point_file);
    if (verify->parsed()) return cmd_verify(suite, verify_out);
    if (gen->parsed()) {
      const ProblemInstance inst = make_instance(cfg);
      save_instance(inst, gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
