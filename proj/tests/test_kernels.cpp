#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ssnkit/kernels.hpp"
#include "ssnkit/rng.hpp"

using namespace ssnkit;
namespace k = ssnkit::kernels;

namespace {

struct BackendGuard {
  ~BackendGuard() { k::set_backend(k::Backend::Auto); }
};

std::vector<double> random_values(Rng& rng, std::size_t n, double thr) {
  std::vector<double> v(n);
  for (auto& x : v) {
    const double u = rng.uniform();
    if (u < 0.1)
      x = thr;  // exactly on the kink
    else if (u < 0.2)
      x = -thr;
    else if (u < 0.25)
      x = 0.0;
    else if (u < 0.3)
      x = -0.0;
    else
      x = 4.0 * rng.normal();
  }
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("soft threshold scalar semantics") {
  BackendGuard guard;
  k::set_backend(k::Backend::Scalar);
  const std::vector<double> y{2.0, -0.5, 0.0, 1.0, -1.0, 3.5};
  std::vector<double> out(y.size());
  k::soft_threshold(y.data(), 1.0, out.data(), y.size());
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.0);  // exactly at threshold
  CHECK(out[4] == 0.0);
  CHECK(out[5] == 2.5);
}

TEST_CASE("simd backends match scalar bitwise") {
  BackendGuard guard;
  std::vector<k::Backend> variants;
  if (k::backend_available(k::Backend::Avx2)) variants.push_back(k::Backend::Avx2);
  if (k::backend_available(k::Backend::Neon)) variants.push_back(k::Backend::Neon);
  if (variants.empty()) return;  // scalar-only host

  Rng rng(2024);
  for (const k::Backend variant : variants) {
    // sizes straddle the vector width, tails included
    for (const std::size_t n : {1u, 3u, 4u, 5u, 8u, 17u, 64u, 129u, 1000u}) {
      const double thr = 0.75;
      const auto y = random_values(rng, n, thr);
      const auto x = random_values(rng, n, thr);

      std::vector<double> ref(n), alt(n);

      k::set_backend(k::Backend::Scalar);
      k::soft_threshold(y.data(), thr, ref.data(), n);
      k::set_backend(variant);
      k::soft_threshold(y.data(), thr, alt.data(), n);
      CHECK(bitwise_equal(ref, alt));

      k::set_backend(k::Backend::Scalar);
      k::clamp_min0(y.data(), ref.data(), n);
      k::set_backend(variant);
      k::clamp_min0(y.data(), alt.data(), n);
      CHECK(bitwise_equal(ref, alt));

      k::set_backend(k::Backend::Scalar);
      k::axpby(1.0, x.data(), -0.37, y.data(), ref.data(), n);
      k::set_backend(variant);
      k::axpby(1.0, x.data(), -0.37, y.data(), alt.data(), n);
      CHECK(bitwise_equal(ref, alt));

      k::set_backend(k::Backend::Scalar);
      k::sub(x.data(), y.data(), ref.data(), n);
      k::set_backend(variant);
      k::sub(x.data(), y.data(), alt.data(), n);
      CHECK(bitwise_equal(ref, alt));
    }
  }
}

TEST_CASE("dispatch resolves to a usable backend") {
  BackendGuard guard;
  k::set_backend(k::Backend::Auto);
  const auto active = k::active_backend();
  CHECK(k::backend_available(active));
  std::vector<double> y{1.0, -2.0}, out(2);
  k::clamp_min0(y.data(), out.data(), 2);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
}
