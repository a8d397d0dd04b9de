#include "semcrra/compression_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semcrra/errors.hpp"
#include "semcrra/kernels.hpp"

namespace semcrra {

CompressionGrid::CompressionGrid(int n_features) : n_features_(n_features) {
  if (n_features < 2) throw DomainError("compression grid needs at least 2 feature maps");
  candidates_.reserve(static_cast<std::size_t>(n_features - 1));
  for (int k = 1; k < n_features; ++k) candidates_.push_back(static_cast<double>(k) / n_features);
}

CompressionGrid CompressionGrid::from_candidates(std::vector<double> candidates) {
  if (candidates.empty()) throw DomainError("compression grid must be nonempty");
  for (double o : candidates) {
    if (!(o > 0.0 && o < 1.0)) throw DomainError("compression candidates must lie in (0, 1)");
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  CompressionGrid grid{Empty{}};
  grid.n_features_ = static_cast<int>(candidates.size()) + 1;
  grid.candidates_ = std::move(candidates);
  return grid;
}

double subproblem_objective(const UserLink& link, double o, const AccuracyModel& model) {
  return effective_accuracy_bound(link, CompressionRatio(o), model);
}

std::vector<double> scan_compression(const UserLink& link, const AccuracyModel& model, const CompressionGrid& grid) {
  const auto os = grid.candidates();
  const std::size_t n = os.size();
  std::vector<double> exponent(n), scale(n, 1.0 / (link.snr_scale() * link.delta())), weight(n), out(n);
  const double load = std::numbers::ln2 * link.spectral_load();
  for (std::size_t k = 0; k < n; ++k) {
    exponent[k] = load * (1.0 - os[k]);
    weight[k] = model(os[k]);
  }
  kernels::surrogate_batch(exponent, scale, weight, out);
  return out;
}

CompressionChoice optimize_compression(const UserLink& link, const AccuracyModel& model, const CompressionGrid& grid,
                                       const CompressionOptions& options) {
  const auto os = grid.candidates();
  if (os.empty()) throw DomainError("optimize_compression: empty grid");
  const std::vector<double> values = scan_compression(link, model, grid);
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  CompressionChoice choice{os[best], subproblem_objective(link, os[best], model)};
  if (!options.refine_continuous) return choice;

  // Golden-section on the bracket formed by the neighbouring grid points.
  double lo = best > 0 ? os[best - 1] : os[best] * 0.5;
  double hi = best + 1 < os.size() ? os[best + 1] : 0.5 * (os[best] + 1.0);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto f = [&](double o) { return subproblem_objective(link, o, model); };
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  const double o_ref = 0.5 * (lo + hi);
  const double v_ref = f(o_ref);
  if (v_ref > choice.value) choice = {o_ref, v_ref};
  return choice;
}

}  // namespace semcrra
