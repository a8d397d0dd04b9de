#include "semcrra/resource_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "barrier.hpp"
#include "semcrra/errors.hpp"
#include "semcrra/kernels.hpp"

namespace semcrra {
namespace {

using detail::Block;
using detail::kB;
using detail::kF;
using detail::kM;
using detail::kP;
using detail::kQ;
using detail::kX;
using detail::kY;
using detail::kZ;

constexpr double kLn2 = std::numbers::ln2;
// Budget comparisons treat sums within this relative distance as equal.
constexpr double kBudgetRelTol = 1e-12;
// A user whose term already reaches exp(-arg^2/2) >= 1 - 5e-15 at the minimum
// allocation gains nothing from more resources.
constexpr double kDegenerateArg = 1e-7;

double physical_arg(const UserLink& link, double o, double b, double p) {
  const double exponent = kLn2 * link.d0() * (1.0 - o) / (b * link.t0());
  return link.n0() * b * std::expm1(exponent) / (link.delta() * p);
}

struct Scales {
  double b_ref, p_ref;
};

Scales scales_of(const ResourceProblem& pb) {
  const double u = static_cast<double>(pb.users());
  return {pb.budgets.b_max / u, pb.budgets.p_max / u};
}

// Load d0 (1 - o) / (t0 b_ref) and coupling N0 b_ref / (delta p_ref) in equal-share units.
double user_load(const ResourceProblem& pb, std::size_t i, const Scales& sc) {
  const auto& l = pb.links[i];
  return l.d0() * (1.0 - pb.o[i]) / (l.t0() * sc.b_ref);
}
double user_kappa(const ResourceProblem& pb, std::size_t i, const Scales& sc) {
  const auto& l = pb.links[i];
  return l.n0() * sc.b_ref / (l.delta() * sc.p_ref);
}

bool is_degenerate(const ResourceProblem& pb, std::size_t i) {
  if (!(pb.alphas[i] > 0.0)) return true;
  return physical_arg(pb.links[i], pb.o[i], pb.budgets.b_min, pb.budgets.p_min) < kDegenerateArg;
}

// Tight lifted values of one user at (B, P) in equal-share units.
Block tight_block(double load, double kappa, double b, double p) {
  Block v{};
  v[kB] = b;
  v[kP] = p;
  v[kQ] = load / b;
  v[kM] = std::expm1(kLn2 * v[kQ]);
  v[kZ] = b * v[kM];
  v[kX] = kappa * v[kZ] / p;
  v[kY] = -0.5 * v[kX] * v[kX];
  v[kF] = std::exp(v[kY]);
  return v;
}

void put_block(SlackState& s, std::size_t i, const Block& v) {
  s.f[i] = v[kF];
  s.y[i] = v[kY];
  s.x[i] = v[kX];
  s.m[i] = v[kM];
  s.q[i] = v[kQ];
  s.z[i] = v[kZ];
}

SlackState sized_slack(std::size_t n) {
  SlackState s;
  for (auto* vec : {&s.f, &s.y, &s.x, &s.m, &s.q, &s.z}) vec->assign(n, 0.0);
  return s;
}

bool within(double lhs, double rhs, double rel) { return lhs <= rhs + rel * std::max({std::fabs(lhs), std::fabs(rhs), 1e-300}); }

}  // namespace

void Budgets::check_feasible(std::size_t users) const {
  for (double v : {b_min, b_max, p_min, p_max}) {
    if (!std::isfinite(v) || v <= 0.0) throw InfeasibleError("budgets must be finite and positive");
  }
  const double u = static_cast<double>(users);
  if (users == 0) throw InfeasibleError("no users");
  if (u * b_min > b_max * (1.0 + kBudgetRelTol)) {
    throw InfeasibleError("bandwidth budget " + std::to_string(b_max) + " Hz below U * b_min");
  }
  if (u * p_min > p_max * (1.0 + kBudgetRelTol)) {
    throw InfeasibleError("power budget " + std::to_string(p_max) + " W below U * p_min");
  }
}

bool Budgets::bandwidth_pinned(std::size_t users) const noexcept {
  return static_cast<double>(users) * b_min >= b_max * (1.0 - kBudgetRelTol);
}

bool Budgets::power_pinned(std::size_t users) const noexcept {
  return static_cast<double>(users) * p_min >= p_max * (1.0 - kBudgetRelTol);
}

void ResourceProblem::validate() const {
  if (o.size() != links.size() || alphas.size() != links.size()) {
    throw DomainError("resource problem: links, o and alphas must have equal length");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!(o[i] > 0.0 && o[i] <= 1.0)) throw DomainError("resource problem: o must lie in (0, 1]");
    if (!std::isfinite(alphas[i])) throw DomainError("resource problem: alphas must be finite");
  }
  budgets.check_feasible(links.size());
}

double resource_objective(std::span<const UserLink> links, std::span<const double> o, std::span<const double> alphas) {
  if (o.size() != links.size() || alphas.size() != links.size()) {
    throw DomainError("resource_objective: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const double arg = outage_argument(links[i], o[i]);
    sum += alphas[i] * std::exp(-0.5 * arg * arg);
  }
  return sum;
}

double resource_objective(const ResourceProblem& pb, std::span<const double> bandwidth, std::span<const double> power) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pb.users(); ++i) {
    const double arg = physical_arg(pb.links[i], pb.o[i], bandwidth[i], power[i]);
    sum += pb.alphas[i] * std::exp(-0.5 * arg * arg);
  }
  return sum;
}

double linearize_exp(double y, double y_anchor) noexcept {
  const double e = std::exp(y_anchor);
  return e + (y - y_anchor) * e;
}

double linearize_bilinear_z(double b, double m, double b_anchor, double m_anchor) noexcept {
  const double d = b_anchor - m_anchor;
  return 0.25 * ((b + m) * (b + m) - 2.0 * (b - m) * d + d * d);
}

double linearize_bilinear_xp(double x, double p, double x_anchor, double p_anchor, XpLinearization variant) noexcept {
  const double s = x_anchor + p_anchor;
  if (variant == XpLinearization::printed) {
    const double d = x_anchor - p_anchor;
    return 2.0 * (x + p) * s - s * s - 2.0 * (x - p) * d + s * s;
  }
  return 2.0 * (x + p) * s - s * s - (x - p) * (x - p);
}

Allocation equal_split(const ResourceProblem& pb) {
  const std::size_t n = pb.users();
  Allocation a;
  a.bandwidth.assign(n, pb.budgets.b_max / static_cast<double>(n));
  a.power.assign(n, pb.budgets.p_max / static_cast<double>(n));
  a.objective = resource_objective(pb, a.bandwidth, a.power);
  return a;
}

SubproblemAnchor tight_anchor(const ResourceProblem& pb, const Allocation& allocation) {
  pb.validate();
  const Scales sc = scales_of(pb);
  SubproblemAnchor anchor{allocation, sized_slack(pb.users())};
  for (std::size_t i = 0; i < pb.users(); ++i) {
    put_block(anchor.slack, i,
              tight_block(user_load(pb, i, sc), user_kappa(pb, i, sc), allocation.bandwidth[i] / sc.b_ref,
                          allocation.power[i] / sc.p_ref));
  }
  anchor.allocation.objective = resource_objective(pb, allocation.bandwidth, allocation.power);
  return anchor;
}

double budget_violation(const Allocation& a, const Budgets& b) {
  double worst = 0.0;
  double sum_b = 0.0, sum_p = 0.0;
  for (std::size_t i = 0; i < a.bandwidth.size(); ++i) {
    worst = std::max(worst, (b.b_min - a.bandwidth[i]) / b.b_min);
    worst = std::max(worst, (b.p_min - a.power[i]) / b.p_min);
    sum_b += a.bandwidth[i];
    sum_p += a.power[i];
  }
  worst = std::max(worst, (sum_b - b.b_max) / b.b_max);
  worst = std::max(worst, (sum_p - b.p_max) / b.p_max);
  return worst;
}

SubproblemResult solve_convex_subproblem(const ResourceProblem& pb, const SubproblemAnchor& anchor,
                                         const BarrierOptions& options) {
  pb.validate();
  const std::size_t n = pb.users();
  const Scales sc = scales_of(pb);
  const auto& ab = anchor.allocation.bandwidth;
  const auto& ap = anchor.allocation.power;
  const auto& as = anchor.slack;
  if (ab.size() != n || ap.size() != n || as.f.size() != n || as.y.size() != n || as.x.size() != n ||
      as.m.size() != n || as.q.size() != n || as.z.size() != n) {
    throw AnchorError("anchor dimensions do not match the problem");
  }
  if (budget_violation(anchor.allocation, pb.budgets) > 1e-9) throw AnchorError("anchor violates the budgets");

  std::vector<std::size_t> active;
  std::vector<bool> degenerate(n);
  for (std::size_t i = 0; i < n; ++i) {
    degenerate[i] = is_degenerate(pb, i);
    if (!degenerate[i]) active.push_back(i);
  }

  SubproblemResult result;
  result.allocation.bandwidth.assign(n, pb.budgets.b_min);
  result.allocation.power.assign(n, pb.budgets.p_min);
  result.slack = sized_slack(n);

  detail::BarrierProblem bp;
  bp.xp = options.xp;
  bp.fix_b = pb.budgets.bandwidth_pinned(n);
  bp.fix_p = pb.budgets.power_pinned(n);
  const double n_deg = static_cast<double>(n - active.size());
  bp.b_min = pb.budgets.b_min / sc.b_ref;
  bp.p_min = pb.budgets.p_min / sc.p_ref;
  bp.b_cap = (pb.budgets.b_max - n_deg * pb.budgets.b_min) / sc.b_ref;
  bp.p_cap = (pb.budgets.p_max - n_deg * pb.budgets.p_min) / sc.p_ref;

  std::vector<Block> start;
  const double n_act = static_cast<double>(active.size());
  const double b_center = bp.b_min + (bp.b_cap - n_act * bp.b_min) / (2.0 * std::max(n_act, 1.0));
  const double p_center = bp.p_min + (bp.p_cap - n_act * bp.p_min) / (2.0 * std::max(n_act, 1.0));
  constexpr double kPull = 1e-8;
  constexpr double kMargin = 1e-10;
  for (std::size_t i : active) {
    detail::BarrierAnchor a{ab[i] / sc.b_ref, ap[i] / sc.p_ref, as.y[i], as.x[i], as.m[i]};
    if (options.balance_bilinear) {
      if (a.m > 0.0 && a.b > 0.0) a.sb = std::sqrt(a.m / a.b);
      if (a.x > 0.0 && a.p > 0.0) a.sx = std::sqrt(a.p / a.x);
    }
    a.y_floor = as.y[i] - options.max_exponent_drop * std::max(1.0, std::fabs(as.y[i]));
    const detail::BarrierUser u{user_load(pb, i, sc), user_kappa(pb, i, sc), pb.alphas[i]};

    // The anchor itself must satisfy the lifted constraints (the restrictions
    // are tangent there).
    const double rel = 1e-9;
    const bool anchor_ok = within(as.f[i], std::exp(as.y[i]), rel) &&
                           within(as.y[i], -0.5 * as.x[i] * as.x[i], rel) &&
                           within(u.kappa * as.z[i], as.x[i] * a.p, rel) && within(a.b * as.m[i], as.z[i], rel) &&
                           within(std::expm1(kLn2 * as.q[i]), as.m[i], rel) && within(u.load / a.b, as.q[i], rel);
    if (!anchor_ok) throw AnchorError("anchor of user " + std::to_string(i) + " violates the lifted constraints");

    bp.users.push_back(u);
    bp.anchors.push_back(a);
    const std::size_t k = bp.size() - 1;

    Block v{};
    v[kB] = bp.fix_b ? bp.b_min : (1.0 - kPull) * a.b + kPull * b_center;
    v[kP] = bp.fix_p ? bp.p_min : (1.0 - kPull) * a.p + kPull * p_center;
    v[kQ] = u.load / v[kB] * (1.0 + kMargin) + 1e-12;
    v[kM] = std::expm1(kLn2 * v[kQ]) * (1.0 + kMargin) + 1e-12;
    v[kZ] = detail::z_majorant(bp, k, v[kB], v[kM]) * (1.0 + kMargin) + 1e-12;
    const double target = 4.0 * u.kappa * v[kZ];
    // Solve for x' = sx x on the restricted x-P constraint with P' = P / sx.
    const double sx = a.sx;
    const double ps = v[kP] / sx;
    const double sj = sx * a.x + a.p / sx;
    if (bp.xp == XpLinearization::minorant) {
      // Smaller root of -x'^2 + 2x' (sj + P') + c0 = target, nudged inside.
      const double c0 = 2.0 * ps * sj - sj * sj - ps * ps;
      const double disc = 4.0 * ps * sj - target;
      if (!(disc > 0.0)) throw AnchorError("no interior start for the x-P restriction of user " + std::to_string(i));
      const double hi = (sj + ps) + std::sqrt(disc);
      const double lo = (target - c0) / hi;
      v[kX] = (lo + 1e-9 * (hi - lo)) / sx;
    } else {
      const double dx = sx * a.x - a.p / sx;
      const double slope = 2.0 * sj - 2.0 * dx;
      if (!(slope > 0.0)) throw AnchorError("degenerate printed x-P restriction");
      const double xs = (target - ps * (2.0 * sj + 2.0 * dx)) / slope;
      v[kX] = (xs + 1e-9 * std::max(std::fabs(xs), 1e-12)) / sx;
    }
    v[kY] = -0.5 * v[kX] * v[kX] * (1.0 + kMargin) - 1e-12;
    const double f_cap = linearize_exp(v[kY], a.y);
    v[kF] = f_cap - std::max(kMargin * std::fabs(f_cap), 1e-24);
    const auto s = detail::user_slacks(bp, k, v);
    if (!std::all_of(s.begin(), s.end(), [](double x) { return x > 0.0; })) {
      throw AnchorError("no strictly interior start near the anchor of user " + std::to_string(i));
    }
    start.push_back(v);
  }

  if (!active.empty()) {
    double sum_b = 0.0, sum_p = 0.0;
    for (const auto& v : start) {
      sum_b += v[kB];
      sum_p += v[kP];
    }
    if ((!bp.fix_b && !(sum_b < bp.b_cap)) || (!bp.fix_p && !(sum_p < bp.p_cap))) {
      throw AnchorError("anchor allocation leaves no interior budget slack");
    }
    const bool frozen = bp.fix_b && bp.fix_p;
    detail::BarrierOutcome outcome;
    if (frozen) {
      outcome.point = start;
    } else {
      outcome = detail::run_barrier(bp, std::move(start), options);
    }
    result.duality_gap = outcome.duality_gap;
    result.newton_steps = outcome.newton_steps;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t i = active[k];
      const Block& v = outcome.point[k];
      result.allocation.bandwidth[i] = bp.fix_b ? pb.budgets.b_min : v[kB] * sc.b_ref;
      result.allocation.power[i] = bp.fix_p ? pb.budgets.p_min : v[kP] * sc.p_ref;
      put_block(result.slack, i, v);
      result.slack_objective += pb.alphas[i] * v[kF];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!degenerate[i]) continue;
    const Block v = tight_block(user_load(pb, i, sc), user_kappa(pb, i, sc), pb.budgets.b_min / sc.b_ref,
                                pb.budgets.p_min / sc.p_ref);
    put_block(result.slack, i, v);
    result.slack_objective += pb.alphas[i] * v[kF];
  }
  result.allocation.objective = resource_objective(pb, result.allocation.bandwidth, result.allocation.power);
  return result;
}

double original_constraint_violation(const ResourceProblem& pb, const SubproblemResult& r) {
  const Scales sc = scales_of(pb);
  double worst = 0.0;
  const auto viol = [&](double lhs, double rhs) {
    worst = std::max(worst, (lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1e-300}));
  };
  for (std::size_t i = 0; i < pb.users(); ++i) {
    const double b = r.allocation.bandwidth[i] / sc.b_ref;
    const double p = r.allocation.power[i] / sc.p_ref;
    viol(r.slack.f[i], std::exp(r.slack.y[i]));
    viol(r.slack.y[i], -0.5 * r.slack.x[i] * r.slack.x[i]);
    viol(user_kappa(pb, i, sc) * r.slack.z[i], r.slack.x[i] * p);
    viol(b * r.slack.m[i], r.slack.z[i]);
    viol(std::expm1(kLn2 * r.slack.q[i]), r.slack.m[i]);
    viol(user_load(pb, i, sc) / b, r.slack.q[i]);
  }
  return worst;
}

ResourceSolution solve_resource_allocation(const ResourceProblem& pb, const ScaOptions& options,
                                           const std::optional<Allocation>& start) {
  pb.validate();
  ResourceSolution sol;
  Allocation current = start ? *start : equal_split(pb);
  if (current.bandwidth.size() != pb.users() || current.power.size() != pb.users()) {
    throw DomainError("solve_resource_allocation: start allocation has the wrong size");
  }
  current.objective = resource_objective(pb, current.bandwidth, current.power);
  sol.objective_history.push_back(current.objective);

  for (int it = 0; it < options.max_sca_iters; ++it) {
    const SubproblemResult sub = solve_convex_subproblem(pb, tight_anchor(pb, current), options.barrier);
    const double next = sub.allocation.objective;
    const double prev = current.objective;
    if (next < prev - 1e-10 * std::max(1.0, std::fabs(prev))) {
      // Only reachable through round-off at the barrier tolerance.
      sol.converged = true;
      break;
    }
    ++sol.iterations;
    sol.objective_history.push_back(next);
    current = sub.allocation;
    if (next - prev <= options.sca_tol * std::max(std::fabs(prev), 1e-12)) {
      sol.converged = true;
      break;
    }
  }
  sol.allocation = std::move(current);
  return sol;
}

std::vector<std::vector<double>> budget_shares(std::size_t n, double lo, double total, int resolution) {
  if (n < 1 || n > 3) throw OracleScaleError("budget grids support 1 to 3 users");
  std::vector<std::vector<double>> out;
  const double step = (total - static_cast<double>(n) * lo) / resolution;
  if (n == 1) {
    out.push_back({total});
  } else if (n == 2) {
    for (int k = 0; k <= resolution; ++k) {
      const double first = lo + k * step;
      out.push_back({first, std::max(lo, total - first)});
    }
  } else {
    for (int k1 = 0; k1 <= resolution; ++k1) {
      for (int k2 = 0; k1 + k2 <= resolution; ++k2) {
        const double a = lo + k1 * step, b = lo + k2 * step;
        out.push_back({a, b, std::max(lo, total - a - b)});
      }
    }
  }
  return out;
}

Allocation brute_force_allocation(const ResourceProblem& pb, int resolution) {
  pb.validate();
  const std::size_t n = pb.users();
  if (n > 3) throw OracleScaleError("brute_force_allocation supports at most 3 users, got " + std::to_string(n));
  if (resolution < 1) throw DomainError("brute_force_allocation: resolution must be >= 1");

  const auto b_grid = budget_shares(n, pb.budgets.b_min, pb.budgets.b_max, resolution);
  const auto p_grid = budget_shares(n, pb.budgets.p_min, pb.budgets.p_max, resolution);

  const std::size_t np = p_grid.size();
  std::vector<double> exponent(np), scale(np), weight(np), term(np), total(np);
  Allocation best;
  best.objective = -1.0;
  for (const auto& bs : b_grid) {
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& l = pb.links[i];
      const double e = kLn2 * l.d0() * (1.0 - pb.o[i]) / (bs[i] * l.t0());
      for (std::size_t k = 0; k < np; ++k) {
        exponent[k] = e;
        scale[k] = l.n0() * bs[i] / (l.delta() * p_grid[k][i]);
        weight[k] = pb.alphas[i];
      }
      kernels::surrogate_batch(exponent, scale, weight, term);
      for (std::size_t k = 0; k < np; ++k) total[k] += term[k];
    }
    for (std::size_t k = 0; k < np; ++k) {
      if (total[k] > best.objective) {
        best.objective = total[k];
        best.bandwidth = bs;
        best.power = p_grid[k];
      }
    }
  }
  best.objective = resource_objective(pb, best.bandwidth, best.power);
  return best;
}

}  // namespace semcrra
