#pragma once

// Log-barrier Newton solver for the convex restriction of the lifted resource
// problem. Works in equal-share units; resource_opt.cpp handles the mapping to
// and from physical allocations.

#include <array>
#include <cmath>
#include <vector>

#include "semcrra/resource_opt.hpp"

namespace semcrra::detail {

// Variable layout of one user's block.
enum Var : int { kB = 0, kP, kF, kY, kX, kM, kQ, kZ, kVars };

struct BarrierUser {
  double load;   // q >= load / B
  double kappa;  // x P >= kappa z
  double alpha;  // objective weight
};

struct BarrierAnchor {
  double b, p, y, x, m;
  double y_floor = -INFINITY;  // y >= y_floor
  // Unit changes B' = sb B, m' = m / sb and x' = sx x, P' = P / sx applied
  // before the bilinear splits; 1 reproduces the plain restrictions.
  double sb = 1.0, sx = 1.0;
};

struct BarrierProblem {
  std::vector<BarrierUser> users;
  std::vector<BarrierAnchor> anchors;
  double b_min = 0, b_cap = 0, p_min = 0, p_cap = 0;
  bool fix_b = false, fix_p = false;
  XpLinearization xp = XpLinearization::minorant;

  std::size_t size() const noexcept { return users.size(); }
  int constraint_count() const noexcept;
};

using Block = std::array<double, kVars>;

constexpr int kSlacks = 9;
using Slacks = std::array<double, kSlacks>;

// Restricted right-hand sides of z >= B m and 4 x P >= 4 kappa z at user i's anchor.
double z_majorant(const BarrierProblem& problem, std::size_t i, double b, double m) noexcept;
double xp_minorant(const BarrierProblem& problem, std::size_t i, double x, double p) noexcept;

// Negated constraint values (slacks) of user i; all must be > 0 at a strictly
// feasible point. Dropped constraints report 1.
Slacks user_slacks(const BarrierProblem& problem, std::size_t i, const Block& v) noexcept;

struct BarrierOutcome {
  std::vector<Block> point;
  double duality_gap = 0.0;
  int newton_steps = 0;
};

// Minimizes -sum alpha_i f_i over the restricted set from a strictly feasible
// start. Stops when (constraint count) / t <= gap_tol * max(1, sum alpha).
BarrierOutcome run_barrier(const BarrierProblem& problem, std::vector<Block> start, const BarrierOptions& options);

}  // namespace semcrra::detail
