#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ssnkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr const char* kToolVersion = "ssnkit 0.1.0";
inline constexpr const char* kPrngId = "xoshiro256++-1.0/polar";

// Default tolerances shared across modules.
inline constexpr double kBoundaryTol = 1e-9;  // |y_i| == t*lambda decisions
inline constexpr int kEnumCap = 20;           // max boundary coords to enumerate

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_dim(const Vec& v, Index n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(n) + ", got " + std::to_string(v.size()));
}

}  // namespace ssnkit
