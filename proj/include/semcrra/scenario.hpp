#pragma once

// Scenario description: user population, link parameters, budgets and the
// accuracy model, read from a sectioned key = value file.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semcrra/crra.hpp"

namespace semcrra {

enum class Quantity { bandwidth, power, psd, data, time, length, plain };

// Number with an optional unit suffix, converted to the SI base of kind
// (Hz, W, W/Hz, bit, s, m). dBm, dBW, dBm/Hz and dBW/Hz are accepted for
// power and psd; B/kB/MB/GB are bytes (8 bits). Throws DomainError.
double parse_quantity(std::string_view text, Quantity kind);

// Inverse of the dBm/Hz reading: W/Hz -> dBm/Hz.
double watts_per_hz_to_dbm_per_hz(double w) noexcept;

struct DeltaSpec {
  enum class Kind { constant, list, distance };
  Kind kind = Kind::distance;
  double value = 1e-12;            // constant
  std::vector<double> values;      // list, one per user
  double c = 1e-10;                // distance rule delta = c d^{-kappa / 2}
  double kappa = 3.0;
};

struct SweepRange {
  double bandwidth_lo = 1e6;
  double bandwidth_hi = 30e6;
  double power_lo = 1e-3;
  double power_hi = 1.0;
  int points = 10;
};

struct ScenarioConfig {
  std::size_t users = 10;
  double side = 50.0;           // m, square with the server at its centre
  double min_distance = 1.0;    // m, lower clamp for the distance rule
  std::uint64_t seed = 1;
  double d0 = 24.5e3;           // bits
  std::vector<double> t0{5e-3};  // s; one value for everyone or one per user
  double n0 = std::pow(10.0, -20.4);  // -174 dBm/Hz, W/Hz
  Budgets budgets{1e4, 10e6, 1e-5, 0.1};
  DeltaSpec delta;
  AccuracyModel::Params beta{0.92, -0.05, -0.002, 6.0};
  std::filesystem::path samples_file;  // when set, beta is fitted to it
  int features = 64;
  double fcr_fixed_o = 0.5;
  SweepRange sweep;

  // Throws ValidationError naming the offending field, InfeasibleError when
  // the budgets or sweep ranges cannot give every user its minimum.
  void validate() const;
  double t0_of(std::size_t user) const { return t0.size() == 1 ? t0.front() : t0.at(user); }
};

// Data size listed in the simulation table: 24.5 MB.
inline constexpr double kLargeD0Bits = 24.5 * 8e6;

// Empty text gives the defaults. ParseError carries the line; relative
// sample paths resolve against base_dir.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
// Canonical text form; parse_scenario(format_scenario(c)) == c up to the samples path.
std::string format_scenario(const ScenarioConfig& config);

struct Position {
  double x;
  double y;
};

// Uniform placement in the square centred on the server; depends only on seed.
std::vector<Position> place_users(const ScenarioConfig& config);
std::vector<double> resolve_deltas(const ScenarioConfig& config);
// Links carry the equal-split allocation.
std::vector<UserLink> generate_users(const ScenarioConfig& config);
AccuracyModel resolve_accuracy_model(const ScenarioConfig& config);
Instance make_instance(const ScenarioConfig& config);

// splitmix64 of (seed, index); stable per-point seeds independent of run order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace semcrra
