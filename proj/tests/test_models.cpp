#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semcrra/errors.hpp"
#include "semcrra/models.hpp"

using namespace semcrra;
using doctest::Approx;

namespace {

// a = d0 / (B t0) = 1, b = P / (N0 B) = 1, delta = 1.
UserLink unit_link() { return UserLink(LinkParams{1e6, 1.0, 1.0, 1e-6, 1e6, 1.0}); }

const AccuracyModel kSteep({0.8, -0.5, 0.1, -10.0});

}  // namespace

TEST_CASE("Q function values") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(3.0) == Approx(oracle::q_simpson(3.0)).epsilon(1e-9));
  CHECK(q_function(3.0) == Approx(0.0013499).epsilon(1e-4));
  CHECK(q_function(-2.0) == Approx(1.0 - q_function(2.0)).epsilon(1e-15));
  for (double x : {-4.0, -1.0, 0.3, 1.7, 5.0, 8.0}) {
    CAPTURE(x);
    CHECK(std::abs(q_function(x) - oracle::q_simpson(x)) < 1e-10);
  }
  CHECK_THROWS_AS(q_function(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(q_function(INFINITY), DomainError);
}

TEST_CASE("Q function reflection and monotonicity") {
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    CHECK(std::abs(q_function(x) + q_function(-x) - 1.0) < 1e-12);
    // Below -7 both values round to 1.
    if (x > -7.0) CHECK(q_function(x + 0.01) < q_function(x));
    else CHECK(q_function(x + 0.01) <= q_function(x));
  }
}

TEST_CASE("Q bound") {
  CHECK(q_bound(0.0) == 0.5);
  CHECK(q_bound(1.0) == Approx(0.5 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(q_bound(1.0) == Approx(0.30327).epsilon(1e-5));
  CHECK_THROWS_AS(q_bound(-0.1), DomainError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 40.0);
  for (int k = 0; k < 10000; ++k) {
    const double x = d(rng);
    CHECK(q_bound(x) >= q_function(x));
  }
}

TEST_CASE("transmission rate and delay") {
  const UserLink base(LinkParams{1e6, 1.0, 1.0, 1e-9, 1e6, 1e-3});  // P / (N0 B) = 1
  CHECK(transmission_rate(base, 0.0) == 0.0);
  CHECK(transmission_rate(base, 1.0) == Approx(1e6).epsilon(1e-14));
  CHECK(transmission_rate(base, 3.0) == Approx(2e6).epsilon(1e-14));
  CHECK(transmission_delay(base, CompressionRatio(0.5), 1.0) == Approx(0.5).epsilon(1e-14));
  const double d1 = transmission_delay(base, CompressionRatio(0.8), 2.0);
  const double d2 = transmission_delay(base, CompressionRatio(0.6), 2.0);
  CHECK(d2 == Approx(2.0 * d1).epsilon(1e-13));
  CHECK(transmission_delay(base, CompressionRatio(1.0 - 1e-12), 1.0) < 1e-11);
  CHECK_THROWS_AS(transmission_delay(base, CompressionRatio(0.5), 0.0), DomainError);
  CHECK_THROWS_AS(transmission_delay(base, CompressionRatio(0.5), -1.0), DomainError);
}

TEST_CASE("type invariants") {
  CHECK_THROWS_AS(CompressionRatio(0.0), DomainError);
  CHECK_THROWS_AS(CompressionRatio(1.0), DomainError);
  CHECK_THROWS_AS(UserLink(LinkParams{1, 1, 0, 1, 1, 1}), DomainError);
  CHECK_THROWS_AS(UserLink(LinkParams{1, 1, 1, 1, -1, 1}), DomainError);
  CHECK_THROWS_AS(UserLink(LinkParams{1, 1, 1, 1, 1, INFINITY}), DomainError);
  CHECK_THROWS_AS(AccuracyModel({1.5, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(AccuracyModel({NAN, 0, 0, 0}), DomainError);
  CHECK_NOTHROW(AccuracyModel({0.9, 0, 0, 0}));
  CHECK_FALSE(AccuracyModel::unvalidated({0.5, 0, -1.0, 0}).in_unit_range());
  CHECK(unit_link().spectral_load() == 1.0);
  CHECK(unit_link().snr_scale() == 1.0);
}

TEST_CASE("success probability closed form") {
  const UserLink u = unit_link();
  const double expected = 2.0 * oracle::q_simpson(std::sqrt(2.0) - 1.0);
  CHECK(success_probability(u, CompressionRatio(0.5)) == Approx(expected).epsilon(1e-12));
  CHECK(success_probability(u, CompressionRatio(0.5)) == Approx(0.6787).epsilon(1e-4));
  CHECK(success_probability(u, 1.0) == 1.0);
  CHECK(success_probability(u.with_allocation(1e6, 1e12), CompressionRatio(0.2)) == Approx(1.0).epsilon(1e-9));
  CHECK(success_probability(u.with_allocation(1e6, 1e-30), CompressionRatio(0.2)) == 0.0);
  CHECK_THROWS_AS(success_probability(u, 1.5), DomainError);
}

TEST_CASE("success probability against sampling") {
  const UserLink u = unit_link();
  const oracle::User raw{1e6, 1.0, 1.0, 1e-6};
  const double ref = oracle::success_mc(raw, 1e6, 1.0, 0.5, 10'000'000, 3);
  const double closed = success_probability(u, CompressionRatio(0.5));
  CHECK(std::abs(closed - ref) < 1e-3);
  const double mc = success_probability_mc(u, CompressionRatio(0.5), 1'000'000, 9);
  const double sigma = std::sqrt(closed * (1.0 - closed) / 1e6);
  CHECK(std::abs(mc - closed) < 3.0 * sigma);
  CHECK(success_probability_mc(u, CompressionRatio(0.5), 1'000'000, 9) == mc);
  CHECK(success_probability_mc(u, 1.0, 1000, 1) == 1.0);
  CHECK(success_probability_mc(u, 1.0, 1000, 2) == 1.0);
  CHECK_THROWS_AS(success_probability_mc(u, CompressionRatio(0.5), 0, 1), DomainError);
}

TEST_CASE("success probability is nondecreasing in o, B and P") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lg(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const UserLink u(LinkParams{1e6, 1.0, std::pow(10.0, lg(rng)), 1e-6, 1e6 * std::pow(10.0, lg(rng)),
                                std::pow(10.0, lg(rng))});
    double prev = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double p = success_probability(u, CompressionRatio(k / 100.0));
      CHECK(p >= prev);
      prev = p;
    }
    const CompressionRatio o(0.4);
    CHECK(success_probability(u.with_allocation(u.bandwidth(), 2 * u.power()), o) >= success_probability(u, o));
    CHECK(success_probability(u.with_allocation(2 * u.bandwidth(), u.power()), o) >= success_probability(u, o));
  }
}

TEST_CASE("accuracy curve") {
  CHECK(accuracy(kSteep, 0.0) == Approx(0.9).epsilon(1e-15));
  CHECK(accuracy(kSteep, 1.0) == Approx(0.8 * std::exp(-0.5) + 0.1 * std::exp(-10.0)).epsilon(1e-15));
  CHECK(accuracy(kSteep, 1.0) == Approx(0.48523).epsilon(1e-5));
  const AccuracyModel flat({0.9, 0, 0, 0});
  for (double o : {0.0, 0.3, 1.0}) CHECK(accuracy(flat, o) == 0.9);
  CHECK_THROWS_AS(accuracy(kSteep, -0.01), DomainError);
  CHECK_THROWS_AS(accuracy(kSteep, 1.01), DomainError);
}

TEST_CASE("effective accuracy and its bound") {
  const UserLink u = unit_link();
  const CompressionRatio half(0.5);
  CHECK(effective_accuracy(u, half, kSteep) ==
        Approx(2.0 * oracle::q_simpson(std::sqrt(2.0) - 1.0) * oracle::eta(kSteep.beta(), 0.5)).epsilon(1e-12));
  CHECK(effective_accuracy(u, CompressionRatio(1.0 - 1e-15), kSteep) == Approx(kSteep(1.0)).epsilon(1e-12));
  CHECK(effective_accuracy(u.with_allocation(1e6, 1e-300), half, kSteep) == 0.0);
  CHECK(effective_accuracy_bound(u, CompressionRatio(1.0 - 1e-15), kSteep) == Approx(kSteep(1.0)).epsilon(1e-12));

  // arg = 1: 2^{a (1 - o)} - 1 = 1 needs a (1 - o) = 1, so a = 2 at o = 0.5.
  const UserLink arg_one(LinkParams{2e6, 1.0, 1.0, 1e-6, 1e6, 1.0});
  CHECK(outage_argument(arg_one, 0.5) == Approx(1.0).epsilon(1e-14));
  CHECK(effective_accuracy_bound(arg_one, half, kSteep) == Approx(std::exp(-0.5) * kSteep(0.5)).epsilon(1e-14));
}

TEST_CASE("bound dominates the exact value on random tuples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lg(-2.0, 2.0), uo(0.001, 0.999);
  for (int t = 0; t < 20000; ++t) {
    const UserLink u(LinkParams{1e6 * std::pow(10.0, lg(rng)), 1.0, std::pow(10.0, lg(rng)), 1e-6, 1e6,
                                std::pow(10.0, lg(rng))});
    const CompressionRatio o(uo(rng));
    CHECK(effective_accuracy_bound(u, o, kSteep) >= effective_accuracy(u, o, kSteep));
  }
}

TEST_CASE("formulas are pure") {
  const UserLink u = unit_link();
  const CompressionRatio o(0.37);
  CHECK(success_probability(u, o) == success_probability(u, o));
  CHECK(effective_accuracy_bound(u, o, kSteep) == effective_accuracy_bound(u, o, kSteep));
  CHECK(outage_argument(u, 0.37) == outage_argument(u, 0.37));
}

TEST_CASE("outage argument overflow is infinite, not NaN") {
  const UserLink u(LinkParams{1e9, 1e-3, 1.0, 1e-6, 1e3, 1.0});
  CHECK(std::isinf(outage_argument(u, 0.1)));
  CHECK(success_probability(u, CompressionRatio(0.1)) == 0.0);
  CHECK(effective_accuracy_bound(u, CompressionRatio(0.1), kSteep) == 0.0);
}
