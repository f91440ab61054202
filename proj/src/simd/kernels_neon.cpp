// AArch64 variant: the four logical lanes live in two float64x2 registers.

#include <arm_neon.h>

#include "feemarket/simd/kernels.hpp"
#include "lanes.hpp"

namespace feemarket::simd::neon {

using detail::kLanes;
using detail::LaneSum;

namespace {

struct Pair {
  float64x2_t sum = vdupq_n_f64(0.0);
  float64x2_t comp = vdupq_n_f64(0.0);

  void add(float64x2_t x) noexcept {
    const float64x2_t t = vaddq_f64(sum, x);
    const uint64x2_t sum_dominates = vcgeq_f64(vabsq_f64(sum), vabsq_f64(x));
    const float64x2_t if_sum = vaddq_f64(vsubq_f64(sum, t), x);
    const float64x2_t if_x = vaddq_f64(vsubq_f64(x, t), sum);
    comp = vaddq_f64(comp, vbslq_f64(sum_dominates, if_sum, if_x));
    sum = t;
  }
};

void spill(const Pair& lo, const Pair& hi, LaneSum (&lanes)[kLanes]) noexcept {
  double s[kLanes];
  double c[kLanes];
  vst1q_f64(s, lo.sum);
  vst1q_f64(s + 2, hi.sum);
  vst1q_f64(c, lo.comp);
  vst1q_f64(c + 2, hi.comp);
  for (std::size_t l = 0; l < kLanes; ++l) lanes[l] = LaneSum{s[l], c[l]};
}

}  // namespace

double sum(const double* values, std::size_t n) {
  Pair lo, hi;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < body; i += kLanes) {
    lo.add(vld1q_f64(values + i));
    hi.add(vld1q_f64(values + i + 2));
  }
  LaneSum lanes[kLanes];
  spill(lo, hi, lanes);
  for (std::size_t i = body; i < n; ++i) lanes[i % kLanes].add(values[i]);
  return detail::combine(lanes);
}

double ratio_sum(const double* num, const double* den, std::size_t n) {
  Pair lo, hi;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < body; i += kLanes) {
    lo.add(vdivq_f64(vld1q_f64(num + i), vld1q_f64(den + i)));
    hi.add(vdivq_f64(vld1q_f64(num + i + 2), vld1q_f64(den + i + 2)));
  }
  LaneSum lanes[kLanes];
  spill(lo, hi, lanes);
  for (std::size_t i = body; i < n; ++i) lanes[i % kLanes].add(num[i] / den[i]);
  return detail::combine(lanes);
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) {
  const float64x2_t t = vdupq_n_f64(threshold);
  uint64x2_t acc = vdupq_n_u64(0);
  const std::size_t body = n - n % 2;
  for (std::size_t i = 0; i < body; i += 2) {
    // Comparison lanes are all-ones (== -1 as unsigned); shift down to 1.
    acc = vaddq_u64(acc, vshrq_n_u64(vcgeq_f64(vld1q_f64(values + i), t), 63));
  }
  std::size_t count = static_cast<std::size_t>(vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1));
  for (std::size_t i = body; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace feemarket::simd::neon
