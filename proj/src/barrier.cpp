#include "barrier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace semcrra::detail {
namespace {

using Mat8 = Eigen::Matrix<double, kVars, kVars>;
using Vec8 = Eigen::Matrix<double, kVars, 1>;

constexpr double kLn2 = std::numbers::ln2;

// One scaled LDLT per user block: H = D^{-1} Hs D^{-1} with unit diagonal Hs.
struct BlockSolver {
  Eigen::LDLT<Mat8> ldlt;
  Vec8 d;

  void factor(const Mat8& h) {
    for (int k = 0; k < kVars; ++k) d(k) = 1.0 / std::sqrt(std::max(h(k, k), 1e-300));
    Mat8 scaled = d.asDiagonal() * h * d.asDiagonal();
    ldlt.compute(scaled);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-15) {
      scaled.diagonal().array() += 1e-12;
      ldlt.compute(scaled);
    }
  }
  Vec8 solve(const Vec8& r) const { return d.asDiagonal() * ldlt.solve((d.asDiagonal() * r).eval()); }
};

struct Gradient {
  std::vector<Vec8> blocks;
};

// Accumulates the barrier gradient and Hessian of user i's own constraints.
void user_derivatives(const BarrierProblem& pb, std::size_t i, const Block& v, const Slacks& s,
                      Vec8& g, Mat8& h) {
  const auto& a = pb.anchors[i];
  const auto& u = pb.users[i];
  const double b = v[kB], p = v[kP], x = v[kX], m = v[kM], q = v[kQ];

  const auto add = [&](std::initializer_list<std::pair<int, double>> grad, double slack) {
    const double inv = 1.0 / slack;
    for (const auto& [r, gr] : grad) {
      g(r) += gr * inv;
      for (const auto& [c, gc] : grad) h(r, c) += gr * gc * inv * inv;
    }
  };

  const double e_anchor = std::exp(a.y);
  add({{kF, 1.0}, {kY, -e_anchor}}, s[0]);

  add({{kY, 1.0}, {kX, x}}, s[1]);
  h(kX, kX) += 1.0 / s[1];

  const double two_q = std::exp2(q);
  add({{kQ, kLn2 * two_q}, {kM, -1.0}}, s[2]);
  h(kQ, kQ) += kLn2 * kLn2 * two_q / s[2];

  add({{kB, -u.load / (b * b)}, {kQ, -1.0}}, s[3]);
  h(kB, kB) += 2.0 * u.load / (b * b * b) / s[3];

  const double sb = a.sb;
  const double bs = sb * b, ms = m / sb;
  const double dz = sb * a.b - a.m / sb;
  add({{kB, sb * (0.5 * (bs + ms) - 0.5 * dz)}, {kM, (0.5 * (bs + ms) + 0.5 * dz) / sb}, {kZ, -1.0}}, s[4]);
  h(kB, kB) += 0.5 * sb * sb / s[4];
  h(kB, kM) += 0.5 / s[4];
  h(kM, kB) += 0.5 / s[4];
  h(kM, kM) += 0.5 / (sb * sb) / s[4];

  const double sx = a.sx;
  const double xs = sx * x, ps = p / sx;
  const double sj = sx * a.x + a.p / sx;
  if (pb.xp == XpLinearization::minorant) {
    add({{kZ, 4.0 * u.kappa}, {kX, sx * (-2.0 * sj + 2.0 * (xs - ps))}, {kP, (-2.0 * sj - 2.0 * (xs - ps)) / sx}},
        s[5]);
    h(kX, kX) += 2.0 * sx * sx / s[5];
    h(kX, kP) -= 2.0 / s[5];
    h(kP, kX) -= 2.0 / s[5];
    h(kP, kP) += 2.0 / (sx * sx) / s[5];
  } else {
    const double dx = sx * a.x - a.p / sx;
    add({{kZ, 4.0 * u.kappa}, {kX, sx * (-2.0 * sj + 2.0 * dx)}, {kP, (-2.0 * sj - 2.0 * dx) / sx}}, s[5]);
  }

  if (!pb.fix_b) add({{kB, -1.0}}, s[6]);
  if (!pb.fix_p) add({{kP, -1.0}}, s[7]);
  if (std::isfinite(a.y_floor)) add({{kY, -1.0}}, s[8]);
}

struct GlobalSlacks {
  double b = 1.0, p = 1.0;
};

GlobalSlacks global_slacks(const BarrierProblem& pb, const std::vector<Block>& v) {
  GlobalSlacks gs;
  if (!pb.fix_b) {
    double sum = 0.0;
    for (const auto& blk : v) sum += blk[kB];
    gs.b = pb.b_cap - sum;
  }
  if (!pb.fix_p) {
    double sum = 0.0;
    for (const auto& blk : v) sum += blk[kP];
    gs.p = pb.p_cap - sum;
  }
  return gs;
}

bool all_positive(const Slacks& s) {
  return std::all_of(s.begin(), s.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
}

}  // namespace

int BarrierProblem::constraint_count() const noexcept {
  const int per_user = 6 + (fix_b ? 0 : 1) + (fix_p ? 0 : 1);
  int floors = 0;
  for (const auto& a : anchors) floors += std::isfinite(a.y_floor) ? 1 : 0;
  return static_cast<int>(users.size()) * per_user + floors + (fix_b ? 0 : 1) + (fix_p ? 0 : 1);
}

double z_majorant(const BarrierProblem& pb, std::size_t i, double b, double m) noexcept {
  const auto& a = pb.anchors[i];
  return linearize_bilinear_z(a.sb * b, m / a.sb, a.sb * a.b, a.m / a.sb);
}

double xp_minorant(const BarrierProblem& pb, std::size_t i, double x, double p) noexcept {
  const auto& a = pb.anchors[i];
  return linearize_bilinear_xp(a.sx * x, p / a.sx, a.sx * a.x, a.p / a.sx, pb.xp);
}

Slacks user_slacks(const BarrierProblem& pb, std::size_t i, const Block& v) noexcept {
  const auto& a = pb.anchors[i];
  const auto& u = pb.users[i];
  Slacks s{};
  s[0] = linearize_exp(v[kY], a.y) - v[kF];
  s[1] = -(v[kY] + 0.5 * v[kX] * v[kX]);
  s[2] = v[kM] - std::expm1(kLn2 * v[kQ]);
  s[3] = v[kQ] - u.load / v[kB];
  s[4] = v[kZ] - z_majorant(pb, i, v[kB], v[kM]);
  s[5] = xp_minorant(pb, i, v[kX], v[kP]) - 4.0 * u.kappa * v[kZ];
  s[6] = pb.fix_b ? 1.0 : v[kB] - pb.b_min;
  s[7] = pb.fix_p ? 1.0 : v[kP] - pb.p_min;
  s[8] = std::isfinite(a.y_floor) ? v[kY] - a.y_floor : 1.0;
  return s;
}

BarrierOutcome run_barrier(const BarrierProblem& pb, std::vector<Block> v, const BarrierOptions& options) {
  const std::size_t n = pb.size();
  double alpha_sum = 0.0;
  for (const auto& u : pb.users) alpha_sum += u.alpha;
  const double target_gap = options.gap_tol * std::max(1.0, alpha_sum);
  const double m_c = pb.constraint_count();

  std::vector<Slacks> slacks(n);
  for (std::size_t i = 0; i < n; ++i) slacks[i] = user_slacks(pb, i, v[i]);
  GlobalSlacks gslack = global_slacks(pb, v);

  std::vector<BlockSolver> solvers(n);
  std::vector<Vec8> grad(n), step(n), yb(n), yp(n);
  std::vector<Block> trial(n);
  std::vector<Slacks> trial_slacks(n);

  BarrierOutcome out;
  double t = options.t_init;
  while (true) {
    double last_decrement = INFINITY;
    int stalls = 0;
    for (int it = 0; it < options.max_newton_per_stage; ++it) {
      // Assemble gradient and block Hessians of t * objective + barrier.
      for (std::size_t i = 0; i < n; ++i) {
        Vec8 g = Vec8::Zero();
        Mat8 h = Mat8::Zero();
        user_derivatives(pb, i, v[i], slacks[i], g, h);
        g(kF) -= t * pb.users[i].alpha;
        if (!pb.fix_b) g(kB) += 1.0 / gslack.b;
        if (!pb.fix_p) g(kP) += 1.0 / gslack.p;
        for (int fixed : {pb.fix_b ? int{kB} : -1, pb.fix_p ? int{kP} : -1}) {
          if (fixed < 0) continue;
          h.row(fixed).setZero();
          h.col(fixed).setZero();
          h(fixed, fixed) = 1.0;
          g(fixed) = 0.0;
        }
        grad[i] = g;
        solvers[i].factor(h);
      }

      // Woodbury correction for the rank <= 2 coupling from the budget sums.
      const double wb = pb.fix_b ? 0.0 : 1.0 / gslack.b;
      const double wp = pb.fix_p ? 0.0 : 1.0 / gslack.p;
      Eigen::Matrix2d small = Eigen::Matrix2d::Identity();
      Eigen::Vector2d proj = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        step[i] = solvers[i].solve(-grad[i]);
        Vec8 eb = Vec8::Zero(), ep = Vec8::Zero();
        eb(kB) = wb;
        ep(kP) = wp;
        yb[i] = wb != 0.0 ? solvers[i].solve(eb) : Vec8::Zero();
        yp[i] = wp != 0.0 ? solvers[i].solve(ep) : Vec8::Zero();
        small(0, 0) += wb * yb[i](kB);
        small(0, 1) += wb * yp[i](kB);
        small(1, 0) += wp * yb[i](kP);
        small(1, 1) += wp * yp[i](kP);
        proj(0) += wb * step[i](kB);
        proj(1) += wp * step[i](kP);
      }
      const Eigen::Vector2d coef = small.fullPivLu().solve(proj);
      double decrement = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        step[i] -= yb[i] * coef(0) + yp[i] * coef(1);
        decrement -= grad[i].dot(step[i]);
      }
      if (!(decrement > 0.0) || 0.5 * decrement <= 1e-11) break;
      // Near the round-off floor full steps stop shrinking the decrement.
      stalls = decrement < 1e-6 && decrement > 0.5 * last_decrement ? stalls + 1 : 0;
      if (stalls >= 3) break;
      last_decrement = decrement;

      // Backtracking: strict feasibility first, then sufficient decrease.
      double s = 1.0;
      bool accepted = false;
      const bool check_decrease = decrement > 0.0625;
      while (s > 1e-16) {
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
          for (int k = 0; k < kVars; ++k) trial[i][k] = v[i][k] + s * step[i](k);
          trial_slacks[i] = user_slacks(pb, i, trial[i]);
          feasible = all_positive(trial_slacks[i]);
        }
        GlobalSlacks tg{};
        if (feasible) {
          tg = global_slacks(pb, trial);
          feasible = tg.b > 0.0 && tg.p > 0.0;
        }
        if (feasible) {
          bool ok = true;
          if (check_decrease) {
            // Change of t * objective + barrier, summed term by term.
            double change = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              change -= t * pb.users[i].alpha * (trial[i][kF] - v[i][kF]);
              for (int k = 0; k < kSlacks; ++k) change += std::log(slacks[i][k] / trial_slacks[i][k]);
            }
            change += std::log(gslack.b / tg.b) + std::log(gslack.p / tg.p);
            ok = change <= -0.25 * s * decrement;
          }
          if (ok) {
            v.swap(trial);
            slacks.swap(trial_slacks);
            gslack = tg;
            accepted = true;
            break;
          }
        }
        s *= 0.5;
      }
      ++out.newton_steps;
      if (!accepted) break;
    }
    if (m_c / t <= target_gap) break;
    t *= options.mu;
  }
  out.point = std::move(v);
  out.duality_gap = m_c / t;
  return out;
}

}  // namespace semcrra::detail
