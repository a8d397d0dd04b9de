#pragma once

// Closed-form transmission and task-performance formulas for one user.
//
// Conventions: the compression ratio o is the fraction of semantic data that
// is removed, so a user with raw payload d0 sends d0 (1 - o) bits. The channel
// gain h is a real Gaussian with standard deviation delta and multiplies the
// SNR P / (N0 B) directly.

#include <array>
#include <cstdint>

namespace semcrra {

// Four-parameter double exponential eta(o) = b1 e^{b2 o} + b3 e^{b4 o} mapping
// compression ratio to task accuracy.
class AccuracyModel {
 public:
  using Params = std::array<double, 4>;

  // Validating constructor: every parameter finite and eta(o) in [0, 1] on the
  // 1e-3 grid over [0, 1]. Throws DomainError otherwise.
  explicit AccuracyModel(const Params& beta);

  // No range check; used for intermediate curve-fitting iterates.
  static AccuracyModel unvalidated(const Params& beta) noexcept;

  const Params& beta() const noexcept { return beta_; }

  // eta(o) without a domain check.
  double operator()(double o) const noexcept;

  // True when eta stays inside [0, 1] on the validation grid.
  bool in_unit_range() const noexcept;

  friend bool operator==(const AccuracyModel&, const AccuracyModel&) = default;

 private:
  struct Unchecked {};
  AccuracyModel(const Params& beta, Unchecked) noexcept : beta_(beta) {}
  Params beta_;
};

struct LinkParams {
  double d0;         // bits
  double t0;         // s
  double delta;      // channel standard deviation
  double n0;         // W/Hz
  double bandwidth;  // Hz
  double power;      // W
};

// One user's link budget together with its current (B, P) allocation.
class UserLink {
 public:
  // Throws DomainError unless every field is finite and strictly positive.
  explicit UserLink(const LinkParams& params);

  double d0() const noexcept { return p_.d0; }
  double t0() const noexcept { return p_.t0; }
  double delta() const noexcept { return p_.delta; }
  double n0() const noexcept { return p_.n0; }
  double bandwidth() const noexcept { return p_.bandwidth; }
  double power() const noexcept { return p_.power; }
  const LinkParams& params() const noexcept { return p_; }

  // Same user, different allocation.
  UserLink with_allocation(double bandwidth, double power) const;

  // a = d0 / (B t0)
  double spectral_load() const noexcept { return p_.d0 / (p_.bandwidth * p_.t0); }
  // b = P / (N0 B)
  double snr_scale() const noexcept { return p_.power / (p_.n0 * p_.bandwidth); }

 private:
  LinkParams p_;
};

// Compression ratio strictly inside (0, 1).
class CompressionRatio {
 public:
  explicit CompressionRatio(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// Standard normal tail P(Z > x). DomainError on non-finite x.
double q_function(double x);

// Chernoff-type bound 0.5 exp(-x^2 / 2) >= Q(x), valid for x >= 0.
double q_bound(double x);

// Shannon rate B log2(1 + h P / (N0 B)), bits/s.
double transmission_rate(const UserLink& link, double h);

// d0 (1 - o) / rate, seconds. DomainError for h <= 0.
double transmission_delay(const UserLink& link, CompressionRatio o, double h);

// Argument of the tail function in the success probability:
// (2^{a (1 - o)} - 1) / (b delta) = N0 B (2^{d0 (1 - o) / (B t0)} - 1) / (delta P).
// May be +inf when the exponent overflows.
double outage_argument(const UserLink& link, double o) noexcept;

// P(t <= t0) = 2 Q(outage_argument), clamped to [0, 1].
double success_probability(const UserLink& link, CompressionRatio o);
// Same on the closed interval o in [0, 1]; o = 1 gives exactly 1.
double success_probability(const UserLink& link, double o);

// Monte-Carlo estimate of success_probability: fraction of h ~ N(0, delta^2)
// draws with |h| >= (2^{a (1 - o)} - 1) / b. Deterministic given seed.
double success_probability_mc(const UserLink& link, CompressionRatio o, std::uint64_t samples,
                              std::uint64_t seed);
double success_probability_mc(const UserLink& link, double o, std::uint64_t samples, std::uint64_t seed);

// eta(o); DomainError for o outside [0, 1].
double accuracy(const AccuracyModel& model, double o);

// gamma = P(t <= t0) eta(o).
double effective_accuracy(const UserLink& link, CompressionRatio o, const AccuracyModel& model);

// exp(-arg^2 / 2) eta(o): the Q-bound surrogate of effective_accuracy.
double effective_accuracy_bound(const UserLink& link, CompressionRatio o, const AccuracyModel& model);

}  // namespace semcrra
