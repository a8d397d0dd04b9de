#include <atomic>
#include <cstdlib>
#include <string_view>

#include "semcrra/kernels.hpp"

namespace semcrra::kernels {

#ifndef SEMCRRA_HAVE_AVX2
// Without the AVX2 translation unit the avx2 entry points alias scalar so
// equivalence tests still link; isa_available(Isa::avx2) reports false.
namespace avx2 {
std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept {
  return scalar::count_abs_at_least(values, threshold);
}
void exp_batch(std::span<const double> x, std::span<double> out) noexcept { scalar::exp_batch(x, out); }
void expm1_batch(std::span<const double> x, std::span<double> out) noexcept { scalar::expm1_batch(x, out); }
void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept {
  scalar::surrogate_batch(exponent, scale, weight, out);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(SEMCRRA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa default_isa() noexcept {
  if (const char* env = std::getenv("SEMCRRA_ISA")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

// -1: no override, otherwise static_cast<int>(Isa).
std::atomic<int> g_override{-1};

}  // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() noexcept {
  static const Isa detected = default_isa();
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  return detected;
}

void set_isa_override(std::optional<Isa> isa) noexcept {
  if (!isa) {
    g_override.store(-1, std::memory_order_relaxed);
    return;
  }
  const Isa effective = isa_available(*isa) ? *isa : Isa::scalar;
  g_override.store(static_cast<int>(effective), std::memory_order_relaxed);
}

std::size_t count_abs_at_least(std::span<const double> values, double threshold) noexcept {
  return active_isa() == Isa::avx2 ? avx2::count_abs_at_least(values, threshold)
                                   : scalar::count_abs_at_least(values, threshold);
}

void exp_batch(std::span<const double> x, std::span<double> out) noexcept {
  active_isa() == Isa::avx2 ? avx2::exp_batch(x, out) : scalar::exp_batch(x, out);
}

void expm1_batch(std::span<const double> x, std::span<double> out) noexcept {
  active_isa() == Isa::avx2 ? avx2::expm1_batch(x, out) : scalar::expm1_batch(x, out);
}

void surrogate_batch(std::span<const double> exponent, std::span<const double> scale,
                     std::span<const double> weight, std::span<double> out) noexcept {
  if (active_isa() == Isa::avx2) {
    avx2::surrogate_batch(exponent, scale, weight, out);
  } else {
    scalar::surrogate_batch(exponent, scale, weight, out);
  }
}

}  // namespace semcrra::kernels
