// Built with -mavx2 (no -mfma); only reached after a runtime CPU check.
#include <immintrin.h>

#include "familiar/kernels/nearest.hpp"

namespace familiar::kernels {

NearestResult nearest_avx2(std::span<const double> xs, std::span<const double> ys, double px,
                           double py) {
  const std::size_t n = xs.size();
  const std::size_t vec_end = n - n % 4;

  NearestResult best;
  if (vec_end > 0) {
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    __m256d best_d = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    // Indices fit exactly in a double for any realistic sample count.
    __m256d best_i = _mm256_set1_pd(-1.0);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d step = _mm256_set1_pd(4.0);

    for (std::size_t i = 0; i < vec_end; i += 4) {
      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs.data() + i), vpx);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys.data() + i), vpy);
      const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      const __m256d lt = _mm256_cmp_pd(d2, best_d, _CMP_LT_OQ);
      best_d = _mm256_blendv_pd(best_d, d2, lt);
      best_i = _mm256_blendv_pd(best_i, idx, lt);
      idx = _mm256_add_pd(idx, step);
    }

    alignas(32) double lane_d[4];
    alignas(32) double lane_i[4];
    _mm256_store_pd(lane_d, best_d);
    _mm256_store_pd(lane_i, best_i);
    for (int l = 0; l < 4; ++l) {
      if (lane_i[l] < 0.0) continue;
      const auto li = static_cast<std::size_t>(lane_i[l]);
      if (lane_d[l] < best.dist2 || (lane_d[l] == best.dist2 && li < best.index)) {
        best.dist2 = lane_d[l];
        best.index = li;
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
