#pragma once

// Reference computations used only by the tests. Nothing here calls the
// solver code under test; formulas are re-derived from scratch with plain
// loops so a shared bug cannot hide in both places.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Q(x) by composite Simpson integration of the standard normal density over
// [x, x + 40], reflected for negative x. Absolute error well below 1e-10.
inline double q_simpson(double x) {
  if (x < 0.0) return 1.0 - q_simpson(-x);
  const int n = 80000;
  const double h = 40.0 / n;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = phi(x) + phi(x + 40.0);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * phi(x + k * h);
  return s * h / 3.0;
}

// One user's raw parameters, independent of the library types.
struct User {
  double d0, t0, delta, n0;
};

// N0 B (2^{d0 (1 - o) / (B t0)} - 1) / (delta P) with pow, no expm1.
inline double tail_arg(const User& u, double b, double p, double o) {
  return u.n0 * b * (std::pow(2.0, u.d0 * (1.0 - o) / (b * u.t0)) - 1.0) / (u.delta * p);
}

inline double surrogate_term(const User& u, double b, double p, double o, double alpha) {
  const double x = tail_arg(u, b, p, o);
  return alpha * std::exp(-0.5 * x * x);
}

inline double eta(const std::array<double, 4>& beta, double o) {
  return beta[0] * std::exp(beta[1] * o) + beta[2] * std::exp(beta[3] * o);
}

// Success probability by direct sampling with its own generator and loop.
inline double success_mc(const User& u, double b, double p, double o, std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::normal_distribution<double> h(0.0, u.delta);
  std::uint64_t ok = 0;
  const double bits = u.d0 * (1.0 - o);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double g = h(rng);
    const double rate = b * std::log2(1.0 + std::abs(g) * p / (u.n0 * b));
    ok += rate > 0.0 && bits / rate <= u.t0 ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

struct GridBest {
  double objective = -1.0;
  double b1 = 0.0, p1 = 0.0;
  std::vector<double> o;
  double cell_allowance = 0.0;  // largest drop to a neighbouring grid cell
};

// Two users, budgets spent in full: B2 = b_max - B1, P2 = p_max - P1.
// value(b1, p1, b2, p2, o_out) returns the objective at that split.
template <class Value>
GridBest grid_u2(double b_min, double b_max, double p_min, double p_max, int res, Value value) {
  auto at = [&](double lo, double total, int k) { return lo + (total - 2.0 * lo) * k / res; };
  std::vector<double> table(static_cast<std::size_t>((res + 1) * (res + 1)));
  GridBest best;
  int bi = 0, bj = 0;
  for (int i = 0; i <= res; ++i) {
    const double b1 = at(b_min, b_max, i);
    for (int j = 0; j <= res; ++j) {
      const double p1 = at(p_min, p_max, j);
      std::vector<double> o;
      const double v = value(b1, p1, b_max - b1, p_max - p1, o);
      table[static_cast<std::size_t>(i * (res + 1) + j)] = v;
      if (v > best.objective) {
        best.objective = v;
        best.b1 = b1;
        best.p1 = p1;
        best.o = o;
        bi = i;
        bj = j;
      }
    }
  }
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      const int i = bi + di, j = bj + dj;
      if (i < 0 || j < 0 || i > res || j > res) continue;
      best.cell_allowance =
          std::max(best.cell_allowance, best.objective - table[static_cast<std::size_t>(i * (res + 1) + j)]);
    }
  }
  return best;
}

// Exhaustive resource search at fixed ratios.
inline GridBest resource_grid_u2(const std::array<User, 2>& u, const std::array<double, 2>& o,
                                 const std::array<double, 2>& alpha, double b_min, double b_max, double p_min,
                                 double p_max, int res) {
  return grid_u2(b_min, b_max, p_min, p_max, res,
                 [&](double b1, double p1, double b2, double p2, std::vector<double>&) {
                   return surrogate_term(u[0], b1, p1, o[0], alpha[0]) + surrogate_term(u[1], b2, p2, o[1], alpha[1]);
                 });
}

// Exhaustive (B, P, o) search: at each split every user takes its best
// ratio from the candidate list, which is exact because users decouple once
// (B, P) is fixed.
inline GridBest joint_grid_u2(const std::array<User, 2>& u, const std::array<double, 4>& beta,
                              const std::vector<double>& candidates, double b_min, double b_max, double p_min,
                              double p_max, int res) {
  std::vector<double> etas;
  for (double o : candidates) etas.push_back(eta(beta, o));
  return grid_u2(b_min, b_max, p_min, p_max, res,
                 [&](double b1, double p1, double b2, double p2, std::vector<double>& o_out) {
                   const double bs[2] = {b1, b2}, ps[2] = {p1, p2};
                   double total = 0.0;
                   o_out.assign(2, 0.0);
                   for (int i = 0; i < 2; ++i) {
                     double best = -1.0;
                     for (std::size_t k = 0; k < candidates.size(); ++k) {
                       const double v = surrogate_term(u[i], bs[i], ps[i], candidates[k], etas[k]);
                       if (v > best) {
                         best = v;
                         o_out[static_cast<std::size_t>(i)] = candidates[k];
                       }
                     }
                     total += best;
                   }
                   return total;
                 });
}

// Central finite differences of f at x.
template <std::size_t N>
std::array<double, N> fd_gradient(const std::function<double(const std::array<double, N>&)>& f,
                                  std::array<double, N> x, double step) {
  std::array<double, N> g{};
  for (std::size_t k = 0; k < N; ++k) {
    const double keep = x[k];
    const double h = step * std::max(1.0, std::abs(keep));
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
