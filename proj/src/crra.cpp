#include "semcrra/crra.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "semcrra/errors.hpp"
#include "semcrra/kernels.hpp"

namespace semcrra {
namespace {

UserLink at(const UserLink& link, const Allocation& a, std::size_t i) {
  return link.with_allocation(a.bandwidth[i], a.power[i]);
}

std::vector<double> alphas_of(const Instance& inst, std::span<const double> o) {
  std::vector<double> alphas(inst.users());
  for (std::size_t i = 0; i < inst.users(); ++i) alphas[i] = inst.models[i](o[i]);
  return alphas;
}

Solution finish(const Instance& inst, Method method, Allocation alloc, std::vector<double> o) {
  Solution s;
  s.method = method;
  s.surrogate_objective = surrogate_total(inst, alloc, o);
  s.exact_objective = exact_total(inst, alloc, o);
  alloc.objective = s.surrogate_objective;
  s.allocation = std::move(alloc);
  s.o = std::move(o);
  return s;
}

Allocation equal_allocation(const Instance& inst) {
  const double u = static_cast<double>(inst.users());
  Allocation a;
  a.bandwidth.assign(inst.users(), inst.budgets.b_max / u);
  a.power.assign(inst.users(), inst.budgets.p_max / u);
  return a;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::crra: return "CRRA";
    case Method::fcr: return "FCR";
    case Method::fra: return "FRA";
    case Method::msr: return "MSR";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "crra") return Method::crra;
  if (lower == "fcr") return Method::fcr;
  if (lower == "fra") return Method::fra;
  if (lower == "msr") return Method::msr;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

void Instance::validate() const {
  if (links.empty()) throw DomainError("instance has no users");
  if (models.size() != links.size()) throw DomainError("instance needs one accuracy model per user");
  budgets.check_feasible(links.size());
}

double surrogate_total(const Instance& inst, const Allocation& alloc, std::span<const double> o) {
  double sum = 0.0;
  for (std::size_t i = 0; i < inst.users(); ++i) {
    sum += effective_accuracy_bound(at(inst.links[i], alloc, i), CompressionRatio(o[i]), inst.models[i]);
  }
  return sum;
}

double exact_total(const Instance& inst, const Allocation& alloc, std::span<const double> o) {
  double sum = 0.0;
  for (std::size_t i = 0; i < inst.users(); ++i) {
    sum += effective_accuracy(at(inst.links[i], alloc, i), CompressionRatio(o[i]), inst.models[i]);
  }
  return sum;
}

std::vector<double> optimize_all_compression(const Instance& inst, const Allocation& alloc,
                                             const CompressionOptions& options) {
  std::vector<double> o(inst.users());
  for (std::size_t i = 0; i < inst.users(); ++i) {
    o[i] = optimize_compression(at(inst.links[i], alloc, i), inst.models[i], inst.grid, options).o_star;
  }
  return o;
}

namespace {

// Budget split favouring user `favoured` by weight 7/3 over the others,
// applied to the spare budget above the per-user minimums.
Allocation skewed_allocation(const Instance& inst, std::size_t favoured) {
  const std::size_t u = inst.users();
  const double total_weight = 7.0 / 3.0 + static_cast<double>(u - 1);
  const auto& b = inst.budgets;
  const double spare_b = b.b_max - static_cast<double>(u) * b.b_min;
  const double spare_p = b.p_max - static_cast<double>(u) * b.p_min;
  Allocation a;
  for (std::size_t i = 0; i < u; ++i) {
    const double share = (i == favoured ? 7.0 / 3.0 : 1.0) / total_weight;
    a.bandwidth.push_back(b.b_min + share * spare_b);
    a.power.push_back(b.p_min + share * spare_p);
  }
  return a;
}

Solution alternate(const Instance& inst, const CrraConfig& config, Allocation alloc) {
  std::vector<double> o(inst.users(), 0.5);
  double previous = surrogate_total(inst, alloc, o);
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;

  for (int it = 0; it < config.max_alternations; ++it) {
    // Compression step at fixed (B, P).
    o = optimize_all_compression(inst, alloc, config.compression);
    // Resource step at fixed o, warm-started from the current allocation.
    const std::vector<double> alphas = alphas_of(inst, o);
    const ResourceProblem pb{inst.links, o, alphas, inst.budgets};
    alloc.objective = resource_objective(pb, alloc.bandwidth, alloc.power);
    ResourceSolution rs = solve_resource_allocation(pb, config.sca, alloc);
    alloc = std::move(rs.allocation);

    const double current = surrogate_total(inst, alloc, o);
    history.push_back(current);
    ++iterations;
    if (std::fabs(current - previous) < config.tol) {
      converged = true;
      break;
    }
    previous = current;
  }
  Solution s = finish(inst, Method::crra, std::move(alloc), std::move(o));
  s.iterations = iterations;
  s.converged = converged;
  s.history = std::move(history);
  return s;
}

}  // namespace

Solution crra_solve(const Instance& inst, const CrraConfig& config) {
  inst.validate();
  if (config.max_alternations < 1 || !(config.tol >= 0.0)) {
    throw DomainError("crra: need max_alternations >= 1 and tol >= 0");
  }
  const Allocation equal = equal_allocation(inst);
  Solution best = alternate(inst, config, equal);
  if (!config.multi_start || inst.users() < 2) return best;
  const auto& b = inst.budgets;
  if (b.bandwidth_pinned(inst.users()) && b.power_pinned(inst.users())) return best;

  // Skewed starts favour the users with the best and the worst compression
  // subproblem value at the equal split.
  std::vector<double> score(inst.users());
  for (std::size_t i = 0; i < inst.users(); ++i) {
    score[i] = optimize_compression(at(inst.links[i], equal, i), inst.models[i], inst.grid, config.compression).value;
  }
  const auto [lo, hi] = std::minmax_element(score.begin(), score.end());
  std::vector<std::size_t> favoured{static_cast<std::size_t>(hi - score.begin())};
  if (lo != hi) favoured.push_back(static_cast<std::size_t>(lo - score.begin()));
  for (std::size_t i : favoured) {
    Solution s = alternate(inst, config, skewed_allocation(inst, i));
    // Strict comparison keeps the earliest start on ties.
    if (s.surrogate_objective > best.surrogate_objective) best = std::move(s);
  }
  return best;
}

Solution fcr_solve(const Instance& inst, std::span<const double> fixed_o, const CrraConfig& config) {
  inst.validate();
  if (fixed_o.size() != inst.users()) throw DomainError("fcr: one fixed ratio per user required");
  std::vector<double> o(fixed_o.begin(), fixed_o.end());
  for (double v : o) CompressionRatio{v};
  const std::vector<double> alphas = alphas_of(inst, o);
  const ResourceProblem pb{inst.links, o, alphas, inst.budgets};
  ResourceSolution rs = solve_resource_allocation(pb, config.sca);
  Solution s = finish(inst, Method::fcr, std::move(rs.allocation), std::move(o));
  s.iterations = rs.iterations;
  s.converged = rs.converged;
  s.history = std::move(rs.objective_history);
  return s;
}

Solution fcr_solve(const Instance& inst, const CrraConfig& config) {
  const std::vector<double> o(inst.users(), config.fcr_fixed_o);
  return fcr_solve(inst, o, config);
}

Solution fra_solve(const Instance& inst, const CrraConfig& config) {
  inst.validate();
  Allocation alloc = equal_allocation(inst);
  std::vector<double> o = optimize_all_compression(inst, alloc, config.compression);
  Solution s = finish(inst, Method::fra, std::move(alloc), std::move(o));
  s.iterations = 1;
  s.converged = true;
  s.history = {s.surrogate_objective};
  return s;
}

double mean_abs_gain(double delta) noexcept { return delta * std::sqrt(2.0 / std::numbers::pi); }

double sum_rate(const Instance& inst, std::span<const double> bandwidth, std::span<const double> power) {
  double sum = 0.0;
  for (std::size_t i = 0; i < inst.users(); ++i) {
    const auto& l = inst.links[i];
    sum += bandwidth[i] * std::log2(1.0 + mean_abs_gain(l.delta()) * power[i] / (l.n0() * bandwidth[i]));
  }
  return sum;
}

std::vector<double> project_capped(std::span<const double> x, double lo, double cap) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::max(x[i] - lo, 0.0);
    sum += w[i];
  }
  const double room = cap - static_cast<double>(n) * lo;
  if (sum > room) {
    // Projection onto the simplex {w >= 0, sum w = room}.
    std::vector<double> sorted(x.begin(), x.end());
    for (auto& v : sorted) v -= lo;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cumulative += sorted[k];
      const double candidate = (cumulative - room) / static_cast<double>(k + 1);
      if (sorted[k] - candidate > 0.0) tau = candidate;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = std::max(x[i] - lo - tau, 0.0);
  }
  for (auto& v : w) v += lo;
  return w;
}

Allocation max_sum_rate_allocation(const Instance& inst, const MsrOptions& options) {
  inst.validate();
  const std::size_t n = inst.users();
  const auto& bg = inst.budgets;
  // Work in budget fractions u = B / b_max, v = P / p_max; objective in units of b_max.
  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    gain[i] = mean_abs_gain(inst.links[i].delta()) * bg.p_max / (inst.links[i].n0() * bg.b_max);
  }
  const double u_min = bg.b_min / bg.b_max, v_min = bg.p_min / bg.p_max;
  const auto value = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += u[i] * std::log2(1.0 + gain[i] * v[i] / u[i]);
    return s;
  };
  const auto gradient = [&](const std::vector<double>& u, const std::vector<double>& v, std::vector<double>& gu,
                            std::vector<double>& gv) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = gain[i] * v[i] / u[i];
      gu[i] = std::log2(1.0 + s) - s / ((1.0 + s) * std::numbers::ln2);
      gv[i] = gain[i] / ((1.0 + s) * std::numbers::ln2);
    }
  };

  std::vector<double> u(n, 1.0 / static_cast<double>(n)), v(n, 1.0 / static_cast<double>(n));
  std::vector<double> gu(n), gv(n), tu(n), tv(n);
  double f = value(u, v);
  double step = 1e-2;
  for (int it = 0; it < options.max_iters; ++it) {
    gradient(u, v, gu, gv);
    // Stationarity: distance moved by a unit projected-gradient step.
    std::vector<double> su(n), sv(n);
    for (std::size_t i = 0; i < n; ++i) {
      su[i] = u[i] + gu[i];
      sv[i] = v[i] + gv[i];
    }
    const auto pu = project_capped(su, u_min, 1.0);
    const auto pv = project_capped(sv, v_min, 1.0);
    double stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) stat = std::max({stat, std::fabs(pu[i] - u[i]), std::fabs(pv[i] - v[i])});
    if (stat < options.stationarity_tol) break;

    bool accepted = false;
    while (step > 1e-18) {
      for (std::size_t i = 0; i < n; ++i) {
        su[i] = u[i] + step * gu[i];
        sv[i] = v[i] + step * gv[i];
      }
      tu = project_capped(su, u_min, 1.0);
      tv = project_capped(sv, v_min, 1.0);
      double ascent = 0.0;
      for (std::size_t i = 0; i < n; ++i) ascent += gu[i] * (tu[i] - u[i]) + gv[i] * (tv[i] - v[i]);
      const double ft = value(tu, tv);
      if (ft >= f + 1e-4 * ascent) {
        u = tu;
        v = tv;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }

  Allocation a;
  a.bandwidth.resize(n);
  a.power.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.bandwidth[i] = u[i] * bg.b_max;
    a.power[i] = v[i] * bg.p_max;
  }
  a.objective = sum_rate(inst, a.bandwidth, a.power);
  return a;
}

Solution msr_solve(const Instance& inst, const CrraConfig& config, const MsrOptions& msr) {
  Allocation alloc = max_sum_rate_allocation(inst, msr);
  std::vector<double> o = optimize_all_compression(inst, alloc, config.compression);
  Solution s = finish(inst, Method::msr, std::move(alloc), std::move(o));
  s.iterations = 1;
  s.converged = true;
  s.history = {s.surrogate_objective};
  return s;
}

Solution solve_method(Method method, const Instance& inst, const CrraConfig& config) {
  switch (method) {
    case Method::crra: return crra_solve(inst, config);
    case Method::fcr: return fcr_solve(inst, config);
    case Method::fra: return fra_solve(inst, config);
    case Method::msr: return msr_solve(inst, config);
  }
  throw DomainError("unknown method");
}

JointOracle brute_force_joint(const Instance& inst, int resolution) {
  inst.validate();
  const std::size_t n = inst.users();
  if (n > 2) throw OracleScaleError("brute_force_joint supports at most 2 users");
  const auto b_grid = budget_shares(n, inst.budgets.b_min, inst.budgets.b_max, resolution);
  const auto p_grid = budget_shares(n, inst.budgets.p_min, inst.budgets.p_max, resolution);
  const auto os = inst.grid.candidates();
  const std::size_t no = os.size();

  std::vector<std::vector<double>> weights(n, std::vector<double>(no));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < no; ++k) weights[i][k] = inst.models[i](os[k]);
  }
  std::vector<double> exponent(no), scale(no), term(no);
  // table[kb][kp] = sum_i max_o term
  std::vector<std::vector<double>> table(b_grid.size(), std::vector<double>(p_grid.size()));
  JointOracle best;
  best.objective = -1.0;
  std::size_t best_b = 0, best_p = 0;
  for (std::size_t kb = 0; kb < b_grid.size(); ++kb) {
    for (std::size_t kp = 0; kp < p_grid.size(); ++kp) {
      double total = 0.0;
      std::vector<double> o_pick(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& l = inst.links[i];
        const double b = b_grid[kb][i], p = p_grid[kp][i];
        const double load = std::numbers::ln2 * l.d0() / (b * l.t0());
        for (std::size_t k = 0; k < no; ++k) {
          exponent[k] = load * (1.0 - os[k]);
          scale[k] = l.n0() * b / (l.delta() * p);
        }
        kernels::surrogate_batch(exponent, scale, weights[i], term);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < no; ++k) {
          if (term[k] > term[arg]) arg = k;
        }
        total += term[arg];
        o_pick[i] = os[arg];
      }
      table[kb][kp] = total;
      if (total > best.objective) {
        best.objective = total;
        best.o = o_pick;
        best_b = kb;
        best_p = kp;
      }
    }
  }
  best.allocation.bandwidth = b_grid[best_b];
  best.allocation.power = p_grid[best_p];
  best.objective = surrogate_total(inst, best.allocation, best.o);
  best.allocation.objective = best.objective;
  for (int db = -1; db <= 1; ++db) {
    for (int dp = -1; dp <= 1; ++dp) {
      const long kb = static_cast<long>(best_b) + db, kp = static_cast<long>(best_p) + dp;
      if (kb < 0 || kp < 0 || kb >= static_cast<long>(b_grid.size()) || kp >= static_cast<long>(p_grid.size())) continue;
      best.cell_allowance = std::max(best.cell_allowance, std::fabs(table[kb][kp] - table[best_b][best_p]));
    }
  }
  return best;
}

}  // namespace semcrra
