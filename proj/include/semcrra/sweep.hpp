#pragma once

// Budget sweeps over all four schemes, CSV/SVG output and the closed-form vs
// Monte-Carlo success-probability check.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semcrra/scenario.hpp"

namespace semcrra {

enum class SweepParam { bandwidth, power };

std::string_view sweep_param_name(SweepParam p) noexcept;  // "b_max" / "p_max"
// Accepts "bandwidth", "b_max", "power", "p_max".
SweepParam parse_sweep_param(std::string_view text);

struct SweepSpec {
  SweepParam param = SweepParam::bandwidth;
  std::vector<double> values;  // Hz or W
  std::vector<Method> methods{Method::crra, Method::fcr, Method::fra, Method::msr};

  // Values strictly increasing and feasible against the minimums; ValidationError otherwise.
  void validate(const ScenarioConfig& config) const;
};

std::vector<double> log_spaced(double lo, double hi, int points);
// Ten log-spaced points over the scenario's sweep range.
SweepSpec default_sweep(const ScenarioConfig& config, SweepParam param);

struct SweepRow {
  SweepParam param = SweepParam::bandwidth;
  double value = 0.0;
  Method method = Method::crra;
  double avg_effective_accuracy = 0.0;  // mean of 2 Q(arg) eta(o)
  double surrogate = 0.0;               // mean of exp(-arg^2 / 2) eta(o)
  int iterations = 0;
  double wall_ms = 0.0;
  std::vector<double> bandwidth, power, o;
  bool converged = false;
  std::string error;  // empty on success; failed rows carry NaN metrics

  bool ok() const noexcept { return error.empty(); }
};

struct SweepResult {
  std::size_t users = 0;
  std::vector<SweepRow> rows;  // ordered by (value, method) as in the spec
};

struct SweepOptions {
  CrraConfig solver;
  unsigned jobs = 1;       // concurrent sweep points
  bool timing = true;      // false writes wall_ms = 0 for byte-stable output
};

SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec, const SweepOptions& options = {});

// Header line of the CSV for U users.
std::string csv_header(std::size_t users);
std::string format_csv(const SweepResult& result);
// DomainError for an empty result (no file is created); std::runtime_error when unwritable.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
SweepResult parse_csv(std::string_view text);
SweepResult read_csv(const std::filesystem::path& path);

// SVG line chart of avg_effective_accuracy against the swept value, one curve per method.
std::string format_plot(const SweepResult& result);
void emit_plot(const SweepResult& result, const std::filesystem::path& path);

struct SuccessCheckRow {
  double o = 0.0;
  double bandwidth = 0.0;
  double power = 0.0;
  double delta = 0.0;
  double closed_form = 0.0;
  double monte_carlo = 0.0;
  double sigma = 0.0;  // sqrt(max(p (1 - p), 1 / n) / n)
  double gap = 0.0;
  bool pass = false;
};

struct SuccessCheckReport {
  std::uint64_t samples = 0;
  std::vector<SuccessCheckRow> rows;
  double max_gap = 0.0;
  bool passed = false;
};

// Checks one tuple: closed form vs n Monte-Carlo draws at 4 sigma.
SuccessCheckRow check_success_probability(const UserLink& link, double o, std::uint64_t samples, std::uint64_t seed);

// Grid over o, B and P on the scenario's first user, plus the o = 1 endpoint
// and a unit-parameter row (a = b = delta = 1, o = 0.5). samples >= 1e4.
SuccessCheckReport validate_success_probability(const ScenarioConfig& config, std::uint64_t samples, std::uint64_t seed);

}  // namespace semcrra
