// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include "feemarket/simd/kernels.hpp"
#include "lanes.hpp"

namespace feemarket::simd::avx2 {

using detail::kLanes;
using detail::LaneSum;

namespace {

struct Accumulator {
  __m256d sum = _mm256_setzero_pd();
  __m256d comp = _mm256_setzero_pd();

  void add(__m256d x) noexcept {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d sum_dominates =
        _mm256_cmp_pd(_mm256_and_pd(sum, abs_mask), _mm256_and_pd(x, abs_mask), _CMP_GE_OQ);
    const __m256d if_sum = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
    const __m256d if_x = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
    comp = _mm256_add_pd(comp, _mm256_blendv_pd(if_x, if_sum, sum_dominates));
    sum = t;
  }

  void spill(LaneSum (&lanes)[kLanes]) const noexcept {
    alignas(32) double s[kLanes];
    alignas(32) double c[kLanes];
    _mm256_store_pd(s, sum);
    _mm256_store_pd(c, comp);
    for (std::size_t l = 0; l < kLanes; ++l) lanes[l] = LaneSum{s[l], c[l]};
  }
};

}  // namespace

double sum(const double* values, std::size_t n) {
  Accumulator acc;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < body; i += kLanes) acc.add(_mm256_loadu_pd(values + i));
  LaneSum lanes[kLanes];
  acc.spill(lanes);
  for (std::size_t i = body; i < n; ++i) lanes[i % kLanes].add(values[i]);
  return detail::combine(lanes);
}

double ratio_sum(const double* num, const double* den, std::size_t n) {
  Accumulator acc;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < body; i += kLanes) {
    acc.add(_mm256_div_pd(_mm256_loadu_pd(num + i), _mm256_loadu_pd(den + i)));
  }
  LaneSum lanes[kLanes];
  acc.spill(lanes);
  for (std::size_t i = body; i < n; ++i) lanes[i % kLanes].add(num[i] / den[i]);
  return detail::combine(lanes);
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  const std::size_t body = n - n % kLanes;
  for (std::size_t i = 0; i < body; i += kLanes) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(values + i), t, _CMP_GE_OQ);
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(ge)));
  }
  for (std::size_t i = body; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace feemarket::simd::avx2
