#pragma once

// Bandwidth/power allocation for fixed compression ratios.
//
// The per-user surrogate alpha_i exp(-arg_i^2 / 2), with
// arg_i = N0 B_i (2^{d0 (1 - o_i) / (B_i t0)} - 1) / (delta_i P_i), is lifted
// into slack variables
//
//   f <= e^y,  y <= -x^2 / 2,  x P >= N0 z / delta,  z >= B m,
//   m >= 2^q - 1,  q >= d0 (1 - o) / (B t0)
//
// and the three nonconvex pieces (e^y, B m, x P) are replaced by tangent
// convex restrictions around an anchor. Each restricted problem is convex and
// is solved with a log-barrier Newton method; re-anchoring at the solution and
// repeating gives a monotone sequence of feasible allocations (successive
// convex approximation).
//
// Internally B and P are measured in units of the equal share b_max / U and
// p_max / U. The slack variables f, y, x, m, q are dimensionless; z carries
// the bandwidth unit, z >= (B / (b_max / U)) m.

#include <optional>
#include <span>
#include <vector>

#include "semcrra/models.hpp"

namespace semcrra {

struct Budgets {
  double b_min;  // Hz, per user
  double b_max;  // Hz, total
  double p_min;  // W, per user
  double p_max;  // W, total

  // InfeasibleError when U b_min > b_max, U p_min > p_max or a bound is not positive.
  void check_feasible(std::size_t users) const;
  bool bandwidth_pinned(std::size_t users) const noexcept;
  bool power_pinned(std::size_t users) const noexcept;
};

struct SlackState {
  std::vector<double> f, y, x, m, q, z;
};

struct Allocation {
  std::vector<double> bandwidth;  // Hz
  std::vector<double> power;      // W
  double objective = 0.0;         // surrogate total effective accuracy
};

// Fixed-compression resource problem. Only the link budgets (d0, t0, delta,
// N0) are read from links; their bandwidth/power fields are ignored.
struct ResourceProblem {
  std::span<const UserLink> links;
  std::span<const double> o;
  std::span<const double> alphas;
  Budgets budgets;

  std::size_t users() const noexcept { return links.size(); }
  // Sizes agree, o in (0, 1], alphas finite, budgets feasible.
  void validate() const;
};

enum class XpLinearization {
  minorant,  // linearize (x+P)^2 only; tangent at the anchor and <= 4xP everywhere
  printed,   // both squares linearized with a (x^j+P^j)^2 tail term; not tangent, kept for comparison
};

struct BarrierOptions {
  double gap_tol = 1e-11;  // target duality measure, relative to max(1, sum alpha)
  double t_init = 1.0;
  double mu = 10.0;
  int max_newton_per_stage = 100;
  XpLinearization xp = XpLinearization::minorant;
  // Rescale (B, m) and (x, P) so both factors of each product are equal at
  // the anchor before splitting it into a difference of squares.
  bool balance_bilinear = true;
  // Lower bound y >= y_anchor - max_exponent_drop max(1, |y_anchor|) on each
  // user's exponent.
  // Without it a user with negligible success probability has an almost flat
  // objective in y and the barrier drives y towards -infinity one Newton
  // doubling at a time.
  double max_exponent_drop = 1e4;
};

struct SubproblemAnchor {
  Allocation allocation;
  SlackState slack;
};

struct SubproblemResult {
  Allocation allocation;
  SlackState slack;
  double slack_objective = 0.0;  // sum alpha_i f_i of the restricted problem
  double duality_gap = 0.0;
  int newton_steps = 0;
};

struct ScaOptions {
  int max_sca_iters = 50;
  double sca_tol = 1e-6;  // relative objective change
  BarrierOptions barrier;
};

struct ResourceSolution {
  Allocation allocation;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // accepted iterates, starting with the initial allocation
};

// sum_i alpha_i exp(-arg_i^2 / 2) at each link's own (B, P).
double resource_objective(std::span<const UserLink> links, std::span<const double> o, std::span<const double> alphas);

// Same quantity for an explicit allocation.
double resource_objective(const ResourceProblem& problem, std::span<const double> bandwidth,
                          std::span<const double> power);

// First-order minorant of e^y at the anchor: e^{ya} (1 + y - ya).
double linearize_exp(double y, double y_anchor) noexcept;

// Convex majorant of B m used for z >= B m:
// ((B+m)^2 - 2 (B-m)(Ba-ma) + (Ba-ma)^2) / 4.
double linearize_bilinear_z(double b, double m, double b_anchor, double m_anchor) noexcept;

// Concave minorant of 4 x P used for x P >= N0 z / delta:
// 2 (x+P)(xa+Pa) - (xa+Pa)^2 - (x-P)^2. The printed variant replaces the last
// square by its own linearization with a (xa+Pa)^2 tail.
double linearize_bilinear_xp(double x, double p, double x_anchor, double p_anchor,
                             XpLinearization variant = XpLinearization::minorant) noexcept;

// Equal split b_max / U, p_max / U.
Allocation equal_split(const ResourceProblem& problem);

// Anchor at an allocation with every slack tight: q = load / B, m = 2^q - 1,
// z = B m, x = arg, y = -x^2/2, f = e^y (B in equal-share units).
SubproblemAnchor tight_anchor(const ResourceProblem& problem, const Allocation& allocation);

// One convex restriction around the anchor, solved by the barrier method.
// Throws InfeasibleError for infeasible budgets and AnchorError when no
// strictly interior start exists near the anchor.
SubproblemResult solve_convex_subproblem(const ResourceProblem& problem, const SubproblemAnchor& anchor,
                                         const BarrierOptions& options = {});

// Largest violation of the unrestricted slack constraints at a subproblem
// output (0 when the lifted point is feasible for the original problem).
double original_constraint_violation(const ResourceProblem& problem, const SubproblemResult& result);

// Largest relative violation of the per-user minimums and total budgets.
double budget_violation(const Allocation& allocation, const Budgets& budgets);

// SCA loop from the equal split (or from `start`) until the relative
// objective change drops below sca_tol; returns the best accepted iterate.
ResourceSolution solve_resource_allocation(const ResourceProblem& problem, const ScaOptions& options = {},
                                           const std::optional<Allocation>& start = std::nullopt);

// Grid over {x_i >= lo, sum x_i = total} for U <= 3: the spare budget
// total - U lo is split in `resolution` equal parts among the first U-1 users
// and the last user takes the remainder.
std::vector<std::vector<double>> budget_shares(std::size_t users, double lo, double total, int resolution);

// Exhaustive search over the budget simplices for U <= 3. Budgets are spent in
// full (the surrogate increases in every B_i and P_i), so the last user takes
// the remainder and the grid spans the other users' shares with `resolution`
// steps per axis. OracleScaleError for U > 3.
Allocation brute_force_allocation(const ResourceProblem& problem, int resolution);

}  // namespace semcrra
