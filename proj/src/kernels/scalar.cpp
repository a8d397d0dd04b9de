#include <cmath>
#include <cstddef>
#include <span>

#include "semcrra/kernels.hpp"

namespace semcrra::kernels::scalar {

std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept {
  std::size_t count = 0;
  for (double v : values) {
    count += std::fabs(v) >= threshold ? 1 : 0;
  }
  return count;
}

void exp_batch(std::span<const double> x, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void expm1_batch(std::span<const double> x, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::expm1(x[i]);
}

void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < exponent.size(); ++i) {
    const double arg = scale[i] * std::expm1(exponent[i]);
    out[i] = weight[i] * std::exp(-0.5 * arg * arg);
  }
}

}  // namespace semcrra::kernels::scalar
