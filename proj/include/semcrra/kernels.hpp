#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64 builds, an AVX2+FMA version. The public entry points dispatch to
// the widest variant the running CPU supports; the per-ISA entry points are
// exposed so tests can check the variants against each other.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace semcrra::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

// True when the variant was compiled in and the CPU can run it.
bool isa_available(Isa isa) noexcept;

// ISA used by the dispatching entry points. Defaults to the widest available;
// the SEMCRRA_ISA environment variable ("scalar" or "avx2") overrides it.
Isa active_isa() noexcept;

// Forces a variant for the dispatching entry points (nullopt restores the
// default). Requests for an unavailable ISA fall back to scalar.
void set_isa_override(std::optional<Isa> isa) noexcept;

// Number of i with |values[i]| >= threshold.
std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept;

// out[i] = exp(x[i]).
void exp_batch(std::span<const double> x, std::span<double> out) noexcept;

// out[i] = expm1(x[i]).
void expm1_batch(std::span<const double> x, std::span<double> out) noexcept;

// out[i] = weight[i] * exp(-0.5 * (scale[i] * expm1(exponent[i]))^2).
//
// With exponent = ln2 * d0 (1 - o) / (B t0) and scale = N0 B / (delta P) this
// is the Q-bound surrogate of one user's effective accuracy, weight = eta(o).
void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept;

namespace scalar {
std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept;
void exp_batch(std::span<const double> x, std::span<double> out) noexcept;
void expm1_batch(std::span<const double> x, std::span<double> out) noexcept;
void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept;
}  // namespace scalar

namespace avx2 {
std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept;
void exp_batch(std::span<const double> x, std::span<double> out) noexcept;
void expm1_batch(std::span<const double> x, std::span<double> out) noexcept;
void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept;
}  // namespace avx2

}  // namespace semcrra::kernels
