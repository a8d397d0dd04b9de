#pragma once

#include <span>
#include <vector>

#include "semcrra/models.hpp"

namespace semcrra {

// Admissible compression ratios. With N feature maps the candidates are
// k / N for k = 1 .. N-1; an explicit candidate list is sorted and
// deduplicated on construction.
class CompressionGrid {
 public:
  static constexpr int kDefaultFeatures = 64;

  explicit CompressionGrid(int n_features = kDefaultFeatures);
  static CompressionGrid from_candidates(std::vector<double> candidates);

  int n_features() const noexcept { return n_features_; }
  std::span<const double> candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }

 private:
  struct Empty {};
  explicit CompressionGrid(Empty) {}
  int n_features_ = 0;
  std::vector<double> candidates_;
};

struct CompressionChoice {
  double o_star;
  double value;
};

struct CompressionOptions {
  // Golden-section search around the best grid point; off by default since
  // the admissible ratios are the discrete feature-map fractions.
  bool refine_continuous = false;
};

// Per-user objective of the compression subproblem; identical to
// effective_accuracy_bound. DomainError for o outside (0, 1).
double subproblem_objective(const UserLink& link, double o, const AccuracyModel& model);

// Best grid point for subproblem_objective at the link's current (B, P);
// ties go to the smaller ratio.
CompressionChoice optimize_compression(const UserLink& link, const AccuracyModel& model,
                                       const CompressionGrid& grid, const CompressionOptions& options = {});

// subproblem_objective at every grid point, evaluated with the batch kernel.
std::vector<double> scan_compression(const UserLink& link, const AccuracyModel& model, const CompressionGrid& grid);

}  // namespace semcrra
