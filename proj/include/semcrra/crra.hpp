#pragma once

// Joint compression-ratio and resource allocation (CRRA) and the three
// comparison schemes: fixed compression ratio (FCR), fixed resource allocation
// (FRA) and maximum sum rate (MSR).

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semcrra/compression_opt.hpp"
#include "semcrra/models.hpp"
#include "semcrra/resource_opt.hpp"

namespace semcrra {

enum class Method { crra, fcr, fra, msr };

std::string_view method_name(Method m) noexcept;
// Case-insensitive "crra", "fcr", "fra", "msr"; DomainError otherwise.
Method parse_method(std::string_view name);

struct Instance {
  std::vector<UserLink> links;        // bandwidth/power fields are ignored
  std::vector<AccuracyModel> models;  // one per user
  Budgets budgets;
  CompressionGrid grid;

  std::size_t users() const noexcept { return links.size(); }
  void validate() const;
};

struct Solution {
  Allocation allocation;
  std::vector<double> o;
  double surrogate_objective = 0.0;  // sum of exp(-arg^2/2) eta(o)
  double exact_objective = 0.0;      // sum of 2 Q(arg) eta(o)
  int iterations = 0;
  bool converged = false;
  Method method = Method::crra;
  std::vector<double> history;       // surrogate objective after each outer iteration
};

struct CrraConfig {
  double tol = 1e-6;            // absolute surrogate change between alternations
  int max_alternations = 30;
  ScaOptions sca;
  CompressionOptions compression;
  double fcr_fixed_o = 0.5;
  // Also run the alternation from two skewed splits (weight 7/3 for the user
  // with the best, then the worst, equal-split compression value) and keep
  // the best surrogate objective.
  bool multi_start = true;
};

struct MsrOptions {
  double stationarity_tol = 1e-8;  // projected-gradient norm in budget-fraction units
  int max_iters = 200000;
};

double surrogate_total(const Instance& inst, const Allocation& alloc, std::span<const double> o);
double exact_total(const Instance& inst, const Allocation& alloc, std::span<const double> o);

// Per-user best grid ratio at the given allocation.
std::vector<double> optimize_all_compression(const Instance& inst, const Allocation& alloc,
                                             const CompressionOptions& options = {});

Solution crra_solve(const Instance& inst, const CrraConfig& config = {});
Solution fcr_solve(const Instance& inst, std::span<const double> fixed_o, const CrraConfig& config = {});
Solution fcr_solve(const Instance& inst, const CrraConfig& config = {});
Solution fra_solve(const Instance& inst, const CrraConfig& config = {});
Solution msr_solve(const Instance& inst, const CrraConfig& config = {}, const MsrOptions& msr = {});
Solution solve_method(Method method, const Instance& inst, const CrraConfig& config = {});

// Deterministic channel used by MSR: E|h| = delta sqrt(2 / pi).
double mean_abs_gain(double delta) noexcept;
// sum_i B_i log2(1 + hbar_i P_i / (N0 B_i)), bits/s.
double sum_rate(const Instance& inst, std::span<const double> bandwidth, std::span<const double> power);
// Projected gradient ascent of sum_rate over the budget sets.
Allocation max_sum_rate_allocation(const Instance& inst, const MsrOptions& options = {});

// Euclidean projection onto {x_i >= lo, sum x_i <= cap}.
std::vector<double> project_capped(std::span<const double> x, double lo, double cap);

struct JointOracle {
  Allocation allocation;
  std::vector<double> o;
  double objective = 0.0;
  // Largest objective change to a neighbouring grid cell of the optimum.
  double cell_allowance = 0.0;
};

// Exhaustive (B, P, o) search for U <= 2 at the given budget-grid resolution;
// o ranges over the instance's compression grid.
JointOracle brute_force_joint(const Instance& inst, int resolution);

}  // namespace semcrra
