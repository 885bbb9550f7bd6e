// AArch64 only. Two double lanes per vector.
#include <arm_neon.h>

#include "familiar/kernels/nearest.hpp"

namespace familiar::kernels {

NearestResult nearest_neon(std::span<const double> xs, std::span<const double> ys, double px,
                           double py) {
  const std::size_t n = xs.size();
  const std::size_t vec_end = n - n % 2;

  NearestResult best;
  if (vec_end > 0) {
    const float64x2_t vpx = vdupq_n_f64(px);
    const float64x2_t vpy = vdupq_n_f64(py);
    float64x2_t best_d = vdupq_n_f64(std::numeric_limits<double>::infinity());
    uint64x2_t best_i = vdupq_n_u64(NearestResult::npos);
    const uint64_t init[2] = {0, 1};
    uint64x2_t idx = vld1q_u64(init);
    const uint64x2_t step = vdupq_n_u64(2);

    for (std::size_t i = 0; i < vec_end; i += 2) {
      const float64x2_t dx = vsubq_f64(vld1q_f64(xs.data() + i), vpx);
      const float64x2_t dy = vsubq_f64(vld1q_f64(ys.data() + i), vpy);
      // Separate multiply and add: vfmaq would round differently from scalar.
      const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
      const uint64x2_t lt = vcltq_f64(d2, best_d);
      best_d = vbslq_f64(lt, d2, best_d);
      best_i = vbslq_u64(lt, idx, best_i);
      idx = vaddq_u64(idx, step);
    }

    double lane_d[2];
    uint64_t lane_i[2];
    vst1q_f64(lane_d, best_d);
    vst1q_u64(lane_i, best_i);
    for (int l = 0; l < 2; ++l) {
      if (lane_i[l] == NearestResult::npos) continue;
      if (lane_d[l] < best.dist2 || (lane_d[l] == best.dist2 && lane_i[l] < best.index)) {
        best.dist2 = lane_d[l];
        best.index = lane_i[l];
      }
    }
  }

  for (std::size_t i = vec_end; i < n; ++i) {
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
