#pragma once

#include <vector>

#include "ssnkit/common.hpp"

namespace ssnkit {

// Fixed-support linear submanifold M = {x : x_i = 0 for i not in S}.
// Linear, so the tangent projection P is one constant diagonal 0/1 matrix,
// the metric projection is exact coordinate zeroing, and the curvature
// constant is zero: project(x + d) = x + P d exactly for x in M.
class SupportManifold {
 public:
  SupportManifold(std::vector<Index> support, Index ambient_dim);
  static SupportManifold full(Index ambient_dim);

  Index ambient_dim() const { return n_; }
  const std::vector<Index>& support() const { return support_; }
  bool is_full() const { return static_cast<Index>(support_.size()) == n_; }
  bool in_support(Index i) const { return mask_[static_cast<std::size_t>(i)]; }

  Mat tangent_projection() const;  // diag, 1 on S
  Vec project(const Vec& y) const;
  bool contains(const Vec& y, double tol = 0.0) const;

 private:
  std::vector<Index> support_;
  std::vector<bool> mask_;
  Index n_;
};

}  // namespace ssnkit
