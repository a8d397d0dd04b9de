#include "semcrra/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "semcrra/errors.hpp"

namespace semcrra {

std::string_view sweep_param_name(SweepParam p) noexcept {
  return p == SweepParam::bandwidth ? "b_max" : "p_max";
}

SweepParam parse_sweep_param(std::string_view text) {
  if (text == "bandwidth" || text == "b_max") return SweepParam::bandwidth;
  if (text == "power" || text == "p_max") return SweepParam::power;
  throw DomainError("sweep parameter must be bandwidth or power, got '" + std::string(text) + "'");
}

void SweepSpec::validate(const ScenarioConfig& config) const {
  if (values.empty()) throw ValidationError("sweep.values", "empty");
  if (methods.empty()) throw ValidationError("sweep.methods", "empty");
  const double u = static_cast<double>(config.users);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ValidationError("sweep.values", "must be finite");
    if (i > 0 && !(values[i] > values[i - 1])) throw ValidationError("sweep.values", "must be strictly increasing");
    const double floor = param == SweepParam::bandwidth ? u * config.budgets.b_min : u * config.budgets.p_min;
    if (values[i] < floor) throw ValidationError("sweep.values", "below users * minimum");
  }
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw DomainError("log_spaced: need 0 < lo < hi and points >= 2");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = lo * std::exp(step * k);
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepSpec default_sweep(const ScenarioConfig& config, SweepParam param) {
  SweepSpec spec;
  spec.param = param;
  spec.values = param == SweepParam::bandwidth
                    ? log_spaced(config.sweep.bandwidth_lo, config.sweep.bandwidth_hi, config.sweep.points)
                    : log_spaced(config.sweep.power_lo, config.sweep.power_hi, config.sweep.points);
  return spec;
}

namespace {

SweepRow run_point(const Instance& base, SweepParam param, double value, Method method, const CrraConfig& solver,
                   bool timing) {
  SweepRow row;
  row.param = param;
  row.value = value;
  row.method = method;
  const auto u = base.users();
  const auto start = std::chrono::steady_clock::now();
  try {
    Instance inst = base;
    (param == SweepParam::bandwidth ? inst.budgets.b_max : inst.budgets.p_max) = value;
    const Solution s = solve_method(method, inst, solver);
    const double du = static_cast<double>(u);
    row.avg_effective_accuracy = s.exact_objective / du;
    row.surrogate = s.surrogate_objective / du;
    row.iterations = s.iterations;
    row.converged = s.converged;
    row.bandwidth = s.allocation.bandwidth;
    row.power = s.allocation.power;
    row.o = s.o;
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
    row.avg_effective_accuracy = row.surrogate = nan;
    row.iterations = -1;
    row.bandwidth.assign(u, nan);
    row.power.assign(u, nan);
    row.o.assign(u, nan);
  }
  if (timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec, const SweepOptions& options) {
  spec.validate(config);
  const Instance base = make_instance(config);
  CrraConfig solver = options.solver;
  solver.fcr_fixed_o = config.fcr_fixed_o;

  SweepResult result;
  result.users = config.users;
  const std::size_t n_methods = spec.methods.size();
  const std::size_t total = spec.values.size() * n_methods;
  result.rows.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      result.rows[k] = run_point(base, spec.param, spec.values[k / n_methods], spec.methods[k % n_methods], solver,
                                 options.timing);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(total)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return result;
}

SuccessCheckRow check_success_probability(const UserLink& link, double o, std::uint64_t samples, std::uint64_t seed) {
  SuccessCheckRow row;
  row.o = o;
  row.bandwidth = link.bandwidth();
  row.power = link.power();
  row.delta = link.delta();
  row.closed_form = success_probability(link, o);
  row.monte_carlo = success_probability_mc(link, o, samples, seed);
  const double n = static_cast<double>(samples);
  const double p = row.closed_form;
  row.sigma = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
  row.gap = std::abs(row.closed_form - row.monte_carlo);
  row.pass = row.gap <= 4.0 * row.sigma;
  return row;
}

SuccessCheckReport validate_success_probability(const ScenarioConfig& config, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 10000) throw DomainError("validate_success_probability: need at least 1e4 samples");
  const auto links = generate_users(config);
  const UserLink& user = links.front();
  auto levels = [](double lo, double hi) {
    return hi > lo ? log_spaced(lo, hi, 3) : std::vector<double>{lo};
  };
  const auto bws = levels(config.budgets.b_min, config.budgets.b_max);
  const auto pws = levels(config.budgets.p_min, config.budgets.p_max);
  const double os[] = {0.1, 0.3, 0.5, 0.7, 0.9};

  SuccessCheckReport report;
  report.samples = samples;
  std::uint64_t index = 0;
  for (double o : os) {
    for (double b : bws) {
      for (double p : pws) {
        report.rows.push_back(check_success_probability(user.with_allocation(b, p), o, samples, derive_seed(seed, index++)));
      }
    }
  }
  report.rows.push_back(check_success_probability(user, 1.0, samples, derive_seed(seed, index++)));
  const UserLink unit(LinkParams{1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
  report.rows.push_back(check_success_probability(unit, 0.5, samples, derive_seed(seed, index++)));

  report.passed = true;
  for (const auto& r : report.rows) {
    report.max_gap = std::max(report.max_gap, r.gap);
    report.passed = report.passed && r.pass;
  }
  return report;
}

}  // namespace semcrra
