#include "semcrra/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semcrra/errors.hpp"
#include "semcrra/kernels.hpp"

namespace semcrra {
namespace {

constexpr int kValidationGridSteps = 1000;

double tail(double x) noexcept {
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

}  // namespace

AccuracyModel::AccuracyModel(const Params& beta) : beta_(beta) {
  for (double b : beta_) {
    if (!std::isfinite(b)) throw DomainError("accuracy model parameters must be finite");
  }
  for (int k = 0; k <= kValidationGridSteps; ++k) {
    const double o = static_cast<double>(k) / kValidationGridSteps;
    const double eta = (*this)(o);
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) {
      throw DomainError("accuracy model leaves [0, 1] at o = " + std::to_string(o) +
                        " (eta = " + std::to_string(eta) + ")");
    }
  }
}

AccuracyModel AccuracyModel::unvalidated(const Params& beta) noexcept { return AccuracyModel(beta, Unchecked{}); }

double AccuracyModel::operator()(double o) const noexcept {
  return beta_[0] * std::exp(beta_[1] * o) + beta_[2] * std::exp(beta_[3] * o);
}

bool AccuracyModel::in_unit_range() const noexcept {
  for (int k = 0; k <= kValidationGridSteps; ++k) {
    const double eta = (*this)(static_cast<double>(k) / kValidationGridSteps);
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) return false;
  }
  return true;
}

UserLink::UserLink(const LinkParams& params) : p_(params) {
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) throw DomainError(std::string("user link: ") + name + " must be positive");
  };
  check(p_.d0, "d0");
  check(p_.t0, "t0");
  check(p_.delta, "delta");
  check(p_.n0, "n0");
  check(p_.bandwidth, "bandwidth");
  check(p_.power, "power");
}

UserLink UserLink::with_allocation(double bandwidth, double power) const {
  LinkParams p = p_;
  p.bandwidth = bandwidth;
  p.power = power;
  return UserLink(p);
}

CompressionRatio::CompressionRatio(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw DomainError("compression ratio must lie in (0, 1)");
}

double q_function(double x) {
  if (!std::isfinite(x)) throw DomainError("q_function: non-finite argument");
  return tail(x);
}

double q_bound(double x) {
  if (!(x >= 0.0)) throw DomainError("q_bound: argument must be >= 0");
  return 0.5 * std::exp(-0.5 * x * x);
}

double transmission_rate(const UserLink& link, double h) {
  if (!(h >= 0.0)) throw DomainError("transmission_rate: channel gain must be >= 0");
  return link.bandwidth() * std::log2(1.0 + h * link.power() / (link.n0() * link.bandwidth()));
}

double transmission_delay(const UserLink& link, CompressionRatio o, double h) {
  if (!(h > 0.0)) throw DomainError("transmission_delay: undefined for channel gain <= 0");
  return link.d0() * (1.0 - o.value()) / transmission_rate(link, h);
}

double outage_argument(const UserLink& link, double o) noexcept {
  const double exponent = std::numbers::ln2 * link.spectral_load() * (1.0 - o);
  return std::expm1(exponent) / (link.snr_scale() * link.delta());
}

double success_probability(const UserLink& link, CompressionRatio o) {
  return success_probability(link, o.value());
}

double success_probability(const UserLink& link, double o) {
  if (!(o >= 0.0 && o <= 1.0)) throw DomainError("success_probability: o must lie in [0, 1]");
  return std::clamp(2.0 * tail(outage_argument(link, o)), 0.0, 1.0);
}

double success_probability_mc(const UserLink& link, CompressionRatio o, std::uint64_t samples,
                              std::uint64_t seed) {
  return success_probability_mc(link, o.value(), samples, seed);
}

double success_probability_mc(const UserLink& link, double o, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("success_probability_mc: need at least one sample");
  if (!(o >= 0.0 && o <= 1.0)) throw DomainError("success_probability_mc: o must lie in [0, 1]");
  const double threshold =
      std::expm1(std::numbers::ln2 * link.spectral_load() * (1.0 - o)) / link.snr_scale();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gain(0.0, link.delta());
  constexpr std::size_t kChunk = 4096;
  std::vector<double> buffer(kChunk);
  std::uint64_t hits = 0;
  std::uint64_t remaining = samples;
  while (remaining > 0) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunk));
    for (std::size_t i = 0; i < n; ++i) buffer[i] = gain(rng);
    hits += kernels::count_abs_at_least(std::span<const double>(buffer.data(), n), threshold);
    remaining -= n;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double accuracy(const AccuracyModel& model, double o) {
  if (!(o >= 0.0 && o <= 1.0)) throw DomainError("accuracy: o must lie in [0, 1]");
  return model(o);
}

double effective_accuracy(const UserLink& link, CompressionRatio o, const AccuracyModel& model) {
  return success_probability(link, o) * accuracy(model, o.value());
}

double effective_accuracy_bound(const UserLink& link, CompressionRatio o, const AccuracyModel& model) {
  const double arg = outage_argument(link, o.value());
  return std::exp(-0.5 * arg * arg) * accuracy(model, o.value());
}

}  // namespace semcrra
