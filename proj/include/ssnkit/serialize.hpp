#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssnkit/diagnostics.hpp"
#include "ssnkit/problems.hpp"
#include "ssnkit/solver.hpp"

namespace ssnkit {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Column-major little-endian double payload.
std::string encode_matrix(const Mat& m);
Mat decode_matrix(const std::string& b64, Index rows, Index cols);
std::string encode_vector(const Vec& v);
Vec decode_vector(const std::string& b64, Index n);

// Instance files: JSON header (params, seed, PRNG id) + base64 payloads.
// Loading reproduces the instance bitwise.
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const std::string& text);
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

void save_vector(const Vec& v, const std::string& path);
Vec load_vector(const std::string& path);

// Trace CSV: header comments carry tool version, PRNG id and seed; columns
// k, resF, mu, dnorm, rnorm, step_kind, time_ms. Doubles printed with %.17g
// (round-trip exact).
std::string trace_to_csv(const SolveTrace& trace, std::uint64_t seed);
std::string trace_to_json(const SolveTrace& trace, std::uint64_t seed);

std::string step_kind_name(StepKind k);
std::string status_name(TerminalStatus s);

std::string report_to_json(const DiagnosticsReport& rep);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace ssnkit
