#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "semcrra/models.hpp"

namespace semcrra {

// One measured (compression ratio, accuracy) point.
struct AccuracySample {
  double o;
  double acc;
};

struct FitConfig {
  int max_iters = 200000;
  double grad_tol = 1e-8;       // stop when the gradient infinity norm drops below
  double rel_obj_tol = 1e-10;   // or when the relative objective change does
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-20;
  // Scale the gradient by the damped Gauss-Newton matrix; false gives plain
  // steepest descent.
  bool precondition = true;
  bool multi_start = false;     // 8 perturbed restarts around init, best rmse wins
  unsigned multi_start_seed = 7;
};

struct FitReport {
  AccuracyModel model = AccuracyModel::unvalidated({0, 0, 0, 0});
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;       // implies final gradient infinity norm < grad_tol
  double gradient_norm = 0.0;   // infinity norm at the returned model
  bool in_unit_range = false;   // eta stays in [0, 1]; fits that leave it are reported, not clipped
};

// Root-mean-square residual of eta against the samples. DomainError if empty.
double rmse(const AccuracyModel& model, std::span<const AccuracySample> samples);

// Mean squared residual, the quantity gradient descent minimizes.
double fit_objective(const AccuracyModel& model, std::span<const AccuracySample> samples);

// Analytic gradient of fit_objective with respect to (b1, b2, b3, b4).
std::array<double, 4> fit_gradient(const AccuracyModel& model, std::span<const AccuracySample> samples);

// [acc_max - acc_min, -1, acc_min, -0.01]
AccuracyModel::Params default_fit_init(std::span<const AccuracySample> samples);

// Descent with Armijo backtracking from init. Throws
// UnderdeterminedFitError with fewer than four distinct abscissae.
FitReport fit_accuracy_model(std::span<const AccuracySample> samples, const AccuracyModel::Params& init,
                             const FitConfig& config = {});

// Two columns (o, accuracy) per line separated by commas, semicolons or
// whitespace; '#' starts a comment. Throws ParseError with the line number.
std::vector<AccuracySample> read_samples(const std::filesystem::path& path);
std::vector<AccuracySample> parse_samples(std::string_view text);

}  // namespace semcrra
