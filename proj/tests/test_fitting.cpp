#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "semcrra/errors.hpp"
#include "semcrra/fitting.hpp"

using namespace semcrra;
using doctest::Approx;

namespace {

std::vector<AccuracySample> sample_curve(const AccuracyModel::Params& beta, int n) {
  std::vector<AccuracySample> s;
  for (int k = 0; k <= n; ++k) {
    const double o = static_cast<double>(k) / n;
    s.push_back({o, oracle::eta(beta, o)});
  }
  return s;
}

}  // namespace

TEST_CASE("rmse") {
  const AccuracyModel flat({0.5, 0, 0, 0});
  CHECK(rmse(flat, std::vector<AccuracySample>{{0.2, 0.5}, {0.7, 0.5}}) == 0.0);
  CHECK(rmse(flat, std::vector<AccuracySample>{{0.2, 0.6}}) == Approx(0.1).epsilon(1e-12));
  CHECK(rmse(flat, std::vector<AccuracySample>{{0.1, 0.8}, {0.2, 0.9}}) == Approx(std::sqrt(0.125)).epsilon(1e-14));
  CHECK(rmse(flat, std::vector<AccuracySample>{{0.1, 0.8}, {0.2, 0.9}}) == Approx(0.35355).epsilon(1e-5));
  CHECK_THROWS_AS(rmse(flat, std::vector<AccuracySample>{}), DomainError);
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uo(0.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const AccuracyModel::Params beta{0.5 + 0.4 * u(rng), 2.0 * u(rng), 0.3 * u(rng), 5.0 * u(rng)};
    std::vector<AccuracySample> s;
    for (int k = 0; k < 12; ++k) s.push_back({uo(rng), uo(rng)});
    const auto g = fit_gradient(AccuracyModel::unvalidated(beta), s);
    const auto fd = oracle::fd_gradient<4>(
        [&](const std::array<double, 4>& b) { return fit_objective(AccuracyModel::unvalidated(b), s); }, beta, 1e-6);
    for (int k = 0; k < 4; ++k) {
      const double scale = std::max(std::abs(fd[k]), 1e-3);
      CHECK(std::abs(g[k] - fd[k]) / scale < 1e-5);
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("gradient special cases") {
  const AccuracyModel::Params beta{0.8, -0.5, 0.1, -10.0};
  const auto on_curve = sample_curve(beta, 10);
  for (double g : fit_gradient(AccuracyModel(beta), on_curve)) CHECK(std::abs(g) < 1e-15);
  const AccuracyModel constant = AccuracyModel::unvalidated({0.0, 0.3, 0.5, 0.0});
  CHECK(fit_gradient(constant, std::vector<AccuracySample>{{0.1, 0.2}, {0.9, 0.7}})[1] == 0.0);
}

TEST_CASE("noiseless double exponential is recovered") {
  const AccuracyModel::Params truth{0.8, -0.5, 0.1, -10.0};
  const auto s = sample_curve(truth, 10);
  const auto report = fit_accuracy_model(s, {0.75, -0.4, 0.12, -9.0});
  CHECK(report.rmse < 1e-3);
  CHECK(report.in_unit_range);
  for (double o = 0.0; o <= 1.0; o += 0.01) CHECK(report.model(o) == Approx(oracle::eta(truth, o)).epsilon(5e-3));

  const auto again = fit_accuracy_model(s, report.model.beta());
  CHECK(std::abs(again.rmse - report.rmse) < 1e-9);
}

TEST_CASE("default init and multi-start") {
  const AccuracyModel::Params truth{0.92, -0.05, -0.002, 6.0};
  const auto s = sample_curve(truth, 16);
  const auto init = default_fit_init(s);
  CHECK(init[1] == -1.0);
  CHECK(init[3] == -0.01);
  FitConfig config;
  config.multi_start = true;
  const auto a = fit_accuracy_model(s, init, config);
  const auto b = fit_accuracy_model(s, init, config);
  CHECK(a.rmse < 1e-3);
  CHECK(a.model == b.model);
  FitConfig single;
  CHECK(a.rmse <= fit_accuracy_model(s, init, single).rmse + 1e-15);
}

TEST_CASE("exact fit at the initial point stops immediately") {
  std::vector<AccuracySample> s;
  for (int k = 0; k < 6; ++k) s.push_back({k / 5.0, 0.9});
  const auto r = fit_accuracy_model(s, {0.9, 0.0, 0.0, 0.0});
  CHECK(r.rmse == 0.0);
  CHECK(r.iterations == 0);
  CHECK(r.converged);
}

TEST_CASE("objective never increases along the descent") {
  const auto s = sample_curve({0.8, -0.5, 0.1, -10.0}, 10);
  const AccuracyModel::Params init{0.5, -1.0, 0.3, -0.01};
  double prev = fit_objective(AccuracyModel::unvalidated(init), s);
  for (int iters : {1, 2, 5, 10, 50, 200, 1000, 5000}) {
    FitConfig c;
    c.max_iters = iters;
    const auto r = fit_accuracy_model(s, init, c);
    const double obj = r.rmse * r.rmse;
    CHECK(obj <= prev * (1.0 + 1e-12));
    prev = obj;
  }
}

TEST_CASE("plain steepest descent is monotone and slower") {
  const auto s = sample_curve({0.8, -0.5, 0.1, -10.0}, 10);
  const AccuracyModel::Params init{0.75, -0.4, 0.12, -9.0};
  FitConfig plain;
  plain.precondition = false;
  plain.max_iters = 2000;
  double prev = fit_objective(AccuracyModel::unvalidated(init), s);
  for (int iters : {1, 10, 100, 2000}) {
    plain.max_iters = iters;
    const auto r = fit_accuracy_model(s, init, plain);
    CHECK(r.rmse * r.rmse <= prev * (1.0 + 1e-12));
    prev = r.rmse * r.rmse;
  }
  FitConfig gn;
  gn.max_iters = 2000;
  CHECK(fit_accuracy_model(s, init, gn).rmse < std::sqrt(prev));
}

TEST_CASE("too few distinct abscissae") {
  std::vector<AccuracySample> s{{0.1, 0.9}, {0.5, 0.8}, {0.9, 0.5}};
  CHECK_THROWS_AS(fit_accuracy_model(s, default_fit_init(s)), UnderdeterminedFitError);
  s.push_back({0.5, 0.7});
  CHECK_THROWS_AS(fit_accuracy_model(s, default_fit_init(s)), UnderdeterminedFitError);
}

TEST_CASE("sample file parsing") {
  const auto s = parse_samples("# header\n0.1, 0.9\n0.2;0.8\n0.3 0.7  # trailing\n\n0.4\t0.6\n");
  REQUIRE(s.size() == 4);
  CHECK(s[1].o == 0.2);
  CHECK(s[3].acc == 0.6);
  try {
    parse_samples("0.1, 0.9\n0.2, abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_samples("0.1, 0.9, 0.3\n"), ParseError);
  CHECK_THROWS_AS(parse_samples("1.2, 0.9\n"), ParseError);
}
