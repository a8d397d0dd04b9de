#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "semcrra/errors.hpp"
#include "semcrra/scenario.hpp"

using namespace semcrra;
using doctest::Approx;

TEST_CASE("unit conversions") {
  CHECK(parse_quantity("-174 dBm/Hz", Quantity::psd) == Approx(std::pow(10.0, -20.4)).epsilon(1e-13));
  CHECK(watts_per_hz_to_dbm_per_hz(parse_quantity("-174 dBm/Hz", Quantity::psd)) == Approx(-174.0).epsilon(1e-13));
  CHECK(parse_quantity("\xE2\x88\x92" "174 dBm/Hz", Quantity::psd) == Approx(std::pow(10.0, -20.4)).epsilon(1e-13));
  CHECK(parse_quantity("-20 dBm", Quantity::power) == Approx(1e-5).epsilon(1e-14));
  CHECK(parse_quantity("30 dBm", Quantity::power) == Approx(1.0).epsilon(1e-14));
  CHECK(parse_quantity("100 mW", Quantity::power) == Approx(0.1));
  CHECK(parse_quantity("0.01 MHz", Quantity::bandwidth) == Approx(1e4));
  CHECK(parse_quantity("2.5e6", Quantity::bandwidth) == 2.5e6);
  CHECK(parse_quantity("24.5 MB", Quantity::data) == Approx(24.5 * 8e6));
  CHECK(parse_quantity("24.5 kbit", Quantity::data) == Approx(24.5e3));
  CHECK(parse_quantity("5 ms", Quantity::time) == Approx(5e-3));
  CHECK(parse_quantity("50m", Quantity::length) == 50.0);
  CHECK_THROWS_AS(parse_quantity("5 parsecs", Quantity::length), DomainError);
  CHECK_THROWS_AS(parse_quantity("MHz", Quantity::bandwidth), DomainError);
  CHECK_THROWS_AS(parse_quantity("1..2 MHz", Quantity::bandwidth), DomainError);
}

TEST_CASE("empty scenario gives the table defaults") {
  const auto c = parse_scenario("");
  CHECK(c.users == 10);
  CHECK(c.n0 == Approx(std::pow(10.0, -20.4)).epsilon(1e-14));
  CHECK(c.budgets.b_min == Approx(1e4));
  CHECK(c.budgets.p_min == Approx(1e-5));
  CHECK(c.t0.size() == 1);
  CHECK(c.t0[0] == Approx(5e-3));
  CHECK(c.d0 == Approx(24.5e3));
  CHECK(c.side == 50.0);
  CHECK(c.features == 64);
}

TEST_CASE("scenario parsing") {
  const auto c = parse_scenario(R"(
# comment
[network]
users = 3
seed = 42   ; trailing comment

[link]
t0 = 1 ms, 2 ms, 10 ms
n0 = -174 dBm/Hz

[channel]
model = list
values = 1e-12, 2e-12, 3e-12

[budgets]
b_max = 3 MHz
)");
  CHECK(c.users == 3);
  CHECK(c.seed == 42);
  CHECK(c.t0_of(2) == Approx(1e-2));
  CHECK(c.budgets.b_max == Approx(3e6));
  const auto links = generate_users(c);
  REQUIRE(links.size() == 3);
  CHECK(links[1].delta() == 2e-12);
  CHECK(links[0].t0() == Approx(1e-3));
  CHECK(links[0].bandwidth() == Approx(1e6));
}

TEST_CASE("scenario errors") {
  CHECK_THROWS_AS(parse_scenario("[network]\nusers = 0\n"), ValidationError);
  try {
    parse_scenario("[network]\nusers = 0\n");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "network.users");
  }
  try {
    parse_scenario("[network]\nusers = 3\n\n[link]\nd0 = lots\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  try {
    parse_scenario("[network]\nusers 3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_scenario("[network]\ncolour = red\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[weather]\nrain = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[channel]\nmodel = list\nvalues = 1e-12\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("[link]\nt0 = 1 ms, 2 ms\n"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("[budgets]\nb_max = 50 kHz\n"), InfeasibleError);
  CHECK_THROWS_AS(parse_scenario("[accuracy]\nbeta = 1, 2, 3\n"), ParseError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.ini"), ParseError);
}

TEST_CASE("user generation") {
  ScenarioConfig c;
  const auto a = place_users(c);
  const auto b = place_users(c);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(std::abs(a[i].x) <= 25.0);
    CHECK(std::abs(a[i].y) <= 25.0);
  }
  c.seed = 2;
  CHECK(place_users(c)[0].x != a[0].x);

  c.delta.kind = DeltaSpec::Kind::constant;
  c.delta.value = 7e-12;
  for (const auto& l : generate_users(c)) CHECK(l.delta() == 7e-12);

  c.delta.kind = DeltaSpec::Kind::distance;
  c.delta.kappa = 0.0;
  c.delta.c = 3e-12;
  for (const auto& l : generate_users(c)) CHECK(l.delta() == Approx(3e-12).epsilon(1e-15));

  c.delta.kappa = 3.0;
  const auto pos = place_users(c);
  const auto deltas = resolve_deltas(c);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double d = std::max(std::hypot(pos[i].x, pos[i].y), 1.0);
    CHECK(deltas[i] == Approx(3e-12 * std::pow(d, -1.5)).epsilon(1e-13));
  }
}

TEST_CASE("format and parse round trip") {
  ScenarioConfig c;
  c.users = 4;
  c.delta.kind = DeltaSpec::Kind::list;
  c.delta.values = {1e-12, 2e-12, 3.3e-12, 4e-12};
  c.t0 = {1e-3, 2e-3, 3e-3, 4e-3};
  const auto back = parse_scenario(format_scenario(c));
  CHECK(back.users == c.users);
  CHECK(back.delta.values == c.delta.values);
  CHECK(back.t0 == c.t0);
  CHECK(back.n0 == c.n0);
  CHECK(back.budgets.p_min == c.budgets.p_min);
  CHECK(back.beta == c.beta);
  CHECK(format_scenario(back) == format_scenario(c));
}

TEST_CASE("accuracy model from a sample file") {
  const auto dir = std::filesystem::temp_directory_path() / "semcrra_scenario_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "acc.csv");
    for (int k = 0; k <= 16; ++k) {
      const double o = k / 16.0;
      f << o << ", " << 0.92 * std::exp(-0.05 * o) - 0.002 * std::exp(6.0 * o) << "\n";
    }
  }
  {
    std::ofstream f(dir / "s.ini");
    f << "[accuracy]\nsamples = acc.csv\n";
  }
  const auto c = load_scenario(dir / "s.ini");
  CHECK(c.samples_file == dir / "acc.csv");
  const auto m = resolve_accuracy_model(c);
  CHECK(m(0.5) == Approx(0.92 * std::exp(-0.025) - 0.002 * std::exp(3.0)).epsilon(2e-3));
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
