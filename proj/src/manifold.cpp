#include "ssnkit/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace ssnkit {

SupportManifold::SupportManifold(std::vector<Index> support, Index ambient_dim)
    : support_(std::move(support)), n_(ambient_dim) {
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
  require(support_.empty() || (support_.front() >= 0 && support_.back() < n_),
          "support indices out of range");
  mask_.assign(static_cast<std::size_t>(n_), false);
  for (Index i : support_) mask_[static_cast<std::size_t>(i)] = true;
}

SupportManifold SupportManifold::full(Index ambient_dim) {
  std::vector<Index> s(static_cast<std::size_t>(ambient_dim));
  for (Index i = 0; i < ambient_dim; ++i) s[static_cast<std::size_t>(i)] = i;
  return SupportManifold(std::move(s), ambient_dim);
}

Mat SupportManifold::tangent_projection() const {
  Mat p = Mat::Zero(n_, n_);
  for (Index i : support_) p(i, i) = 1.0;
  return p;
}

Vec SupportManifold::project(const Vec& y) const {
  require_dim(y, n_, "manifold projection");
  Vec out = y;
  for (Index i = 0; i < n_; ++i)
    if (!mask_[static_cast<std::size_t>(i)]) out[i] = 0.0;
  return out;
}

bool SupportManifold::contains(const Vec& y, double tol) const {
  require_dim(y, n_, "manifold membership");
  for (Index i = 0; i < n_; ++i)
    if (!mask_[static_cast<std::size_t>(i)] && std::fabs(y[i]) > tol) return false;
  return true;
}

}  // namespace ssnkit
