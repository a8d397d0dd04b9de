#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "semcrra/kernels.hpp"

using namespace semcrra;

namespace {

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  if (std::isnan(a) || std::isnan(b)) return INFINITY;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar exp and expm1 kernels match libm exactly") {
  std::mt19937_64 rng(11);
  const auto x = random_values(rng, 1001, -50.0, 50.0);
  std::vector<double> a(x.size()), b(x.size());
  kernels::scalar::exp_batch(x, a);
  kernels::scalar::expm1_batch(x, b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(a[i] == std::exp(x[i]));
    CHECK(b[i] == std::expm1(x[i]));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!kernels::isa_available(kernels::Isa::avx2)) {
    MESSAGE("AVX2 not available; equivalence not exercised");
    return;
  }
  std::mt19937_64 rng(12);

  SUBCASE("exp over the full finite range, odd lengths") {
    for (std::size_t n : {1u, 3u, 4u, 7u, 1001u}) {
      auto x = random_values(rng, n, -745.0, 709.0);
      std::vector<double> a(n), b(n);
      kernels::scalar::exp_batch(x, a);
      kernels::avx2::exp_batch(x, b);
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < 1e-300) CHECK(std::abs(a[i] - b[i]) <= 1e-300 * 4e-16 + 5e-324);
        else CHECK(rel_diff(a[i], b[i]) < 4e-16);
      }
    }
  }

  SUBCASE("exp edge values") {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> x{0.0, -0.0, 1.0, -1.0, 709.7, 710.0, -745.2, -746.0, -1000.0, 1000.0, inf, -inf,
                          -708.5, -720.0, -740.0, 1e-300, -1e-300};
    std::vector<double> a(x.size()), b(x.size());
    kernels::scalar::exp_batch(x, a);
    kernels::avx2::exp_batch(x, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      if (std::isinf(a[i])) CHECK(b[i] == a[i]);
      else if (a[i] < 1e-300) CHECK(std::abs(a[i] - b[i]) <= 2 * 5e-324);
      else CHECK(rel_diff(a[i], b[i]) < 4e-16);
    }
  }

  SUBCASE("expm1 near zero keeps relative accuracy") {
    std::vector<double> x;
    for (int e = -300; e <= 2; ++e) {
      x.push_back(std::ldexp(1.3, e));
      x.push_back(-std::ldexp(1.7, e));
    }
    const auto more = random_values(rng, 501, -40.0, 40.0);
    x.insert(x.end(), more.begin(), more.end());
    std::vector<double> a(x.size()), b(x.size());
    kernels::scalar::expm1_batch(x, a);
    kernels::avx2::expm1_batch(x, b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(x[i]);
      CHECK(rel_diff(a[i], b[i]) < 1e-15);
    }
  }

  SUBCASE("count of |x| >= threshold is identical") {
    for (std::size_t n : {0u, 1u, 5u, 8u, 4097u}) {
      auto x = random_values(rng, n, -3.0, 3.0);
      if (n > 2) x[1] = 0.5, x[2] = -0.5;
      for (double t : {0.0, 0.5, 1.0, 2.999, 10.0}) {
        CHECK(kernels::scalar::count_abs_at_least(x, t) == kernels::avx2::count_abs_at_least(x, t));
      }
    }
  }

  SUBCASE("surrogate batch") {
    const std::size_t n = 2003;
    const auto e = random_values(rng, n, 0.0, 30.0);
    auto s = random_values(rng, n, -20.0, 5.0);
    for (auto& v : s) v = std::pow(10.0, v);
    const auto w = random_values(rng, n, 0.0, 1.0);
    std::vector<double> a(n), b(n);
    kernels::scalar::surrogate_batch(e, s, w, a);
    kernels::avx2::surrogate_batch(e, s, w, b);
    for (std::size_t i = 0; i < n; ++i) {
      CAPTURE(i);
      // exp(-y) carries the relative error of y times y.
      const double arg = s[i] * std::expm1(e[i]);
      const double y = 0.5 * arg * arg;
      if (a[i] < 1e-290) CHECK(b[i] < 1e-290);
      else CHECK(rel_diff(a[i], b[i]) < 1e-14 + 1e-15 * y);
    }
  }
}

TEST_CASE("dispatch honours the override") {
  kernels::set_isa_override(kernels::Isa::scalar);
  CHECK(kernels::active_isa() == kernels::Isa::scalar);
  std::vector<double> x{1.0, -2.0, 3.0};
  CHECK(kernels::count_abs_at_least(x, 2.0) == 2);
  kernels::set_isa_override(std::nullopt);
  if (kernels::isa_available(kernels::Isa::avx2)) {
    kernels::set_isa_override(kernels::Isa::avx2);
    CHECK(kernels::active_isa() == kernels::Isa::avx2);
    CHECK(kernels::count_abs_at_least(x, 2.0) == 2);
    kernels::set_isa_override(std::nullopt);
  }
  CHECK(kernels::isa_name(kernels::Isa::scalar) == "scalar");
}
