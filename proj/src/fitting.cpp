#include "semcrra/fitting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "semcrra/errors.hpp"

namespace semcrra {
namespace {

using Params = AccuracyModel::Params;

double inf_norm(const std::array<double, 4>& g) {
  double n = 0.0;
  for (double v : g) n = std::max(n, std::fabs(v));
  return n;
}

// Residuals and their Jacobian with respect to beta.
void residuals(const Params& b, std::span<const AccuracySample> samples, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  r.resize(n);
  J.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double o = samples[static_cast<std::size_t>(i)].o;
    const double e2 = std::exp(b[1] * o), e4 = std::exp(b[3] * o);
    r(i) = b[0] * e2 + b[2] * e4 - samples[static_cast<std::size_t>(i)].acc;
    J(i, 0) = e2;
    J(i, 1) = b[0] * o * e2;
    J(i, 2) = e4;
    J(i, 3) = b[2] * o * e4;
  }
}

// Descent direction: -grad, or the damped Gauss-Newton step
// -(J'J + lambda diag(J'J))^{-1} grad, which is a descent direction for any lambda > 0.
std::array<double, 4> direction(const Params& beta, std::span<const AccuracySample> samples,
                                const std::array<double, 4>& grad, double lambda, bool precondition) {
  std::array<double, 4> d{};
  if (precondition) {
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    residuals(beta, samples, r, J);
    Eigen::Matrix4d H = 2.0 / static_cast<double>(samples.size()) * (J.transpose() * J);
    for (int k = 0; k < 4; ++k) H(k, k) += lambda * std::max(H(k, k), 1e-12);
    const Eigen::Vector4d g(grad[0], grad[1], grad[2], grad[3]);
    const Eigen::LDLT<Eigen::Matrix4d> ldlt(H);
    const Eigen::Vector4d step = ldlt.solve(g);
    if (ldlt.info() == Eigen::Success && step.allFinite() && step.dot(g) > 0.0) {
      for (int k = 0; k < 4; ++k) d[k] = -step(k);
      return d;
    }
  }
  for (int k = 0; k < 4; ++k) d[k] = -grad[k];
  return d;
}

FitReport descend(std::span<const AccuracySample> samples, const Params& init, const FitConfig& config) {
  Params beta = init;
  AccuracyModel model = AccuracyModel::unvalidated(beta);
  double obj = fit_objective(model, samples);
  std::array<double, 4> grad = fit_gradient(model, samples);
  double lambda = 1e-3;
  double step = config.initial_step;

  FitReport report;
  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    const double gnorm = inf_norm(grad);
    if (gnorm < config.grad_tol) break;
    const auto d = direction(beta, samples, grad, lambda, config.precondition);
    double slope = 0.0;
    for (int k = 0; k < 4; ++k) slope += grad[k] * d[k];

    // Gauss-Newton steps are naturally scaled, so every iteration starts from
    // the full step; plain gradient steps carry the last accepted length.
    double t = config.precondition ? config.initial_step : step;
    bool accepted = false;
    Params trial{};
    double trial_obj = 0.0;
    while (t >= config.min_step) {
      for (int k = 0; k < 4; ++k) trial[k] = beta[k] + t * d[k];
      trial_obj = fit_objective(AccuracyModel::unvalidated(trial), samples);
      if (std::isfinite(trial_obj) && trial_obj <= obj + config.armijo * t * slope) {
        accepted = true;
        break;
      }
      t *= config.backtrack;
    }
    if (!accepted) break;
    lambda = t == config.initial_step ? std::max(lambda * 0.3, 1e-12) : std::min(lambda * 10.0, 1e12);
    const double change = obj - trial_obj;
    beta = trial;
    model = AccuracyModel::unvalidated(beta);
    obj = trial_obj;
    grad = fit_gradient(model, samples);
    step = std::min(t * 2.0, config.initial_step * 1e6);
    if (change <= config.rel_obj_tol * std::max(obj, 1e-300)) {
      ++iter;
      break;
    }
  }
  report.model = model;
  report.rmse = std::sqrt(obj);
  report.iterations = iter;
  report.gradient_norm = inf_norm(grad);
  report.converged = report.gradient_norm < config.grad_tol;
  report.in_unit_range = model.in_unit_range();
  return report;
}

}  // namespace

double fit_objective(const AccuracyModel& model, std::span<const AccuracySample> samples) {
  if (samples.empty()) throw DomainError("fit objective: empty sample set");
  double sum = 0.0;
  for (const auto& s : samples) {
    const double r = model(s.o) - s.acc;
    sum += r * r;
  }
  return sum / static_cast<double>(samples.size());
}

double rmse(const AccuracyModel& model, std::span<const AccuracySample> samples) {
  if (samples.empty()) throw DomainError("rmse: empty sample set");
  return std::sqrt(fit_objective(model, samples));
}

std::array<double, 4> fit_gradient(const AccuracyModel& model, std::span<const AccuracySample> samples) {
  if (samples.empty()) throw DomainError("fit gradient: empty sample set");
  const auto& b = model.beta();
  std::array<double, 4> g{0, 0, 0, 0};
  for (const auto& s : samples) {
    const double e2 = std::exp(b[1] * s.o);
    const double e4 = std::exp(b[3] * s.o);
    const double r = b[0] * e2 + b[2] * e4 - s.acc;
    g[0] += r * e2;
    g[1] += r * b[0] * s.o * e2;
    g[2] += r * e4;
    g[3] += r * b[2] * s.o * e4;
  }
  const double scale = 2.0 / static_cast<double>(samples.size());
  for (double& v : g) v *= scale;
  return g;
}

Params default_fit_init(std::span<const AccuracySample> samples) {
  if (samples.empty()) throw DomainError("default init: empty sample set");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const auto& a, const auto& b) { return a.acc < b.acc; });
  return {hi->acc - lo->acc, -1.0, lo->acc, -0.01};
}

FitReport fit_accuracy_model(std::span<const AccuracySample> samples, const Params& init, const FitConfig& config) {
  std::set<double> abscissae;
  for (const auto& s : samples) abscissae.insert(s.o);
  if (abscissae.size() < 4) {
    throw UnderdeterminedFitError("curve fit needs at least 4 distinct compression ratios, got " +
                                  std::to_string(abscissae.size()));
  }

  FitReport best = descend(samples, init, config);
  if (!config.multi_start) return best;

  std::mt19937_64 rng(config.multi_start_seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (int restart = 0; restart < 8; ++restart) {
    Params start = init;
    for (int k = 0; k < 4; ++k) start[k] += 0.25 * (std::fabs(init[k]) + 0.1) * jitter(rng);
    FitReport candidate = descend(samples, start, config);
    // Strict comparison keeps the earliest restart on ties.
    if (candidate.rmse < best.rmse) best = candidate;
  }
  return best;
}

std::vector<AccuracySample> parse_samples(std::string_view text) {
  std::vector<AccuracySample> samples;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace_if(line.begin(), line.end(), [](char c) { return c == ',' || c == ';' || c == '\t'; }, ' ');
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw ParseError("expected two columns (o, accuracy)", line_no);
    double values[2];
    for (int k = 0; k < 2; ++k) {
      const auto& tok = tokens[k];
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), values[k]);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError("not a number: '" + tok + "'", line_no);
      }
    }
    if (!(values[0] >= 0.0 && values[0] <= 1.0) || !(values[1] >= 0.0 && values[1] <= 1.0)) {
      throw ParseError("sample values must lie in [0, 1]", line_no);
    }
    samples.push_back({values[0], values[1]});
  }
  return samples;
}

std::vector<AccuracySample> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sample file " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_samples(buf.str());
}

}  // namespace semcrra
