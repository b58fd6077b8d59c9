#include "ssnkit/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ssnkit {

using nlohmann::json;

namespace {

constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    const std::uint32_t b0 = data[i];
    const std::uint32_t b1 = i + 1 < len ? data[i + 1] : 0;
    const std::uint32_t b2 = i + 2 < len ? data[i + 2] : 0;
    const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
    out.push_back(kB64Chars[(triple >> 18) & 63]);
    out.push_back(kB64Chars[(triple >> 12) & 63]);
    out.push_back(i + 1 < len ? kB64Chars[(triple >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? kB64Chars[triple & 63] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = b64_value(c);
    if (v < 0) throw std::invalid_argument("base64: invalid character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

std::string encode_matrix(const Mat& m) {
  static_assert(sizeof(double) == 8);
  return base64_encode(reinterpret_cast<const std::uint8_t*>(m.data()),
                       static_cast<std::size_t>(m.size()) * sizeof(double));
}

Mat decode_matrix(const std::string& b64, Index rows, Index cols) {
  const auto bytes = base64_decode(b64);
  require(bytes.size() == static_cast<std::size_t>(rows * cols) * sizeof(double),
          "matrix payload size mismatch");
  Mat m(rows, cols);
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

std::string encode_vector(const Vec& v) {
  return base64_encode(reinterpret_cast<const std::uint8_t*>(v.data()),
                       static_cast<std::size_t>(v.size()) * sizeof(double));
}

Vec decode_vector(const std::string& b64, Index n) {
  const auto bytes = base64_decode(b64);
  require(bytes.size() == static_cast<std::size_t>(n) * sizeof(double),
          "vector payload size mismatch");
  Vec v(n);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

std::string instance_to_json(const ProblemInstance& inst) {
  json j;
  j["format"] = "ssnkit-instance-1";
  j["version"] = kToolVersion;
  j["prng"] = kPrngId;
  j["kind"] = ProblemInstance::kind_name(inst.kind);
  j["m"] = inst.m;
  j["n"] = inst.n;
  j["density"] = inst.density;
  j["lambda"] = inst.lambda;
  j["seed"] = inst.seed;
  j["dup"] = {inst.dup_i1, inst.dup_i2};
  j["no_sc_coord"] = inst.no_sc_coord;
  j["rank_deficient"] = inst.rank_deficient;
  j["A"] = encode_matrix(inst.a);
  j["b"] = encode_vector(inst.b);
  j["c"] = encode_vector(inst.c);
  j["u"] = encode_vector(inst.u_truth);
  if (inst.xstar) j["xstar"] = encode_vector(*inst.xstar);
  return j.dump(2);
}

ProblemInstance instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  require(j.at("format") == "ssnkit-instance-1", "unknown instance format");
  ProblemInstance inst;
  inst.kind = ProblemInstance::kind_from_name(j.at("kind").get<std::string>());
  inst.m = j.at("m").get<Index>();
  inst.n = j.at("n").get<Index>();
  inst.density = j.at("density").get<double>();
  inst.lambda = j.at("lambda").get<double>();
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.dup_i1 = j.at("dup")[0].get<Index>();
  inst.dup_i2 = j.at("dup")[1].get<Index>();
  inst.no_sc_coord = j.at("no_sc_coord").get<Index>();
  inst.rank_deficient = j.at("rank_deficient").get<bool>();
  inst.a = decode_matrix(j.at("A").get<std::string>(), inst.m, inst.n);
  inst.b = decode_vector(j.at("b").get<std::string>(), inst.m);
  inst.c = decode_vector(j.at("c").get<std::string>(), inst.n);
  inst.u_truth = decode_vector(j.at("u").get<std::string>(), inst.n);
  if (j.contains("xstar")) inst.xstar = decode_vector(j.at("xstar").get<std::string>(), inst.n);
  return inst;
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  write_file(path, instance_to_json(inst));
}

ProblemInstance load_instance(const std::string& path) {
  return instance_from_json(read_file(path));
}

void save_vector(const Vec& v, const std::string& path) {
  json j;
  j["format"] = "ssnkit-vector-1";
  j["n"] = v.size();
  j["data"] = encode_vector(v);
  write_file(path, j.dump(2));
}

Vec load_vector(const std::string& path) {
  const json j = json::parse(read_file(path));
  require(j.at("format") == "ssnkit-vector-1", "unknown vector format");
  return decode_vector(j.at("data").get<std::string>(), j.at("n").get<Index>());
}

std::string step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::Newton: return "newton";
    case StepKind::Fallback: return "fallback";
    case StepKind::None: return "none";
  }
  return "?";
}

std::string status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Converged: return "converged";
    case TerminalStatus::MaxIters: return "max_iters";
    case TerminalStatus::LinearSolveFailure: return "linear_solve_failure";
  }
  return "?";
}

std::string trace_to_csv(const SolveTrace& trace, std::uint64_t seed) {
  std::ostringstream os;
  os << "# " << kToolVersion << ", prng=" << kPrngId << ", seed=" << seed << "\n";
  os << "# status=" << status_name(trace.status) << "\n";
  os << "k,resF,mu,dnorm,rnorm,step_kind,time_ms\n";
  for (const auto& r : trace.rows) {
    os << r.k << ',' << fmt_double(r.res_f) << ',' << fmt_double(r.mu) << ','
       << fmt_double(r.dnorm) << ',' << fmt_double(r.rnorm) << ',' << step_kind_name(r.step)
       << ',' << fmt_double(r.time_ms) << "\n";
  }
  return os.str();
}

std::string trace_to_json(const SolveTrace& trace, std::uint64_t seed) {
  json j;
  j["version"] = kToolVersion;
  j["prng"] = kPrngId;
  j["seed"] = seed;
  j["status"] = status_name(trace.status);
  j["x0_projected"] = trace.x0_projected;
  json rows = json::array();
  for (const auto& r : trace.rows) {
    rows.push_back({{"k", r.k},
                    {"resF", r.res_f},
                    {"mu", r.mu},
                    {"dnorm", r.dnorm},
                    {"rnorm", r.rnorm},
                    {"step_kind", step_kind_name(r.step)},
                    {"time_ms", r.time_ms}});
  }
  j["rows"] = std::move(rows);
  j["x_final"] = encode_vector(trace.x_final);
  return j.dump(2);
}

std::string report_to_json(const DiagnosticsReport& rep) {
  json j;
  j["version"] = kToolVersion;
  j["residual_norm"] = rep.residual_norm;
  j["stationary"] = rep.stationary;
  j["bd_regular"] = {{"verdict", verdict_name(rep.bd.verdict)},
                     {"margin", rep.bd.margin},
                     {"elements_tested", rep.bd.elements_tested},
                     {"method", rep.bd.method}};
  j["sc"] = {{"evaluated", rep.sc_evaluated},
             {"holds", rep.sc_holds},
             {"gap", rep.sc_gap}};
  j["invertibility_margin"] = rep.invertibility;
  j["smoothness_probe"] = {{"evaluated", rep.smoothness_evaluated},
                           {"deviation", rep.smoothness_deviation},
                           {"radius", rep.smoothness_radius}};
  j["gamma_hat"] = rep.gamma_hat;
  j["lipschitz_hat"] = rep.lipschitz_hat;
  j["tolerances"] = {{"support_tol", rep.cfg.support_tol},
                     {"sc_tol", rep.cfg.sc_tol},
                     {"pd_tol", rep.cfg.pd_tol},
                     {"boundary_tol", rep.cfg.boundary_tol},
                     {"enum_cap", rep.cfg.enum_cap},
                     {"stationarity_tol", rep.cfg.stationarity_tol},
                     {"root_tol", rep.cfg.root_tol}};
  return j.dump(2);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace ssnkit
