#include "familiar/kernels/nearest.hpp"

namespace familiar::kernels {

NearestResult nearest_scalar(std::span<const double> xs, std::span<const double> ys, double px,
                             double py) {
  NearestResult best;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best.dist2) {
      best.dist2 = d2;
      best.index = i;
    }
  }
  return best;
}

}  // namespace familiar::kernels
