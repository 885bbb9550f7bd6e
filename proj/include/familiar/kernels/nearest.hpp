#pragma once

// Nearest-sample search over a structure-of-arrays point set.
//
// Every variant computes dx*dx + dy*dy in IEEE double without fused
// multiply-add, so all variants return bit-identical results: the minimum
// squared distance and, among equal minima, the lowest index.

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>

namespace familiar::kernels {

struct NearestResult {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t index = npos;
  double dist2 = std::numeric_limits<double>::infinity();

  bool found() const { return index != npos; }
  bool operator==(const NearestResult&) const = default;
};

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

using NearestFn = NearestResult (*)(std::span<const double> xs, std::span<const double> ys,
                                    double px, double py);

NearestResult nearest_scalar(std::span<const double> xs, std::span<const double> ys, double px,
                             double py);

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Kernel for `isa`; falls back to scalar when unavailable.
NearestFn nearest_kernel(Isa isa);

/// Best variant for this CPU, detected once. `FAMILIAR_FORCE_SCALAR=1` pins scalar.
Isa selected_isa();

inline NearestResult nearest(std::span<const double> xs, std::span<const double> ys, double px,
                             double py) {
  return nearest_kernel(selected_isa())(xs, ys, px, py);
}

}  // namespace familiar::kernels
