#include "feemarket/simd/kernels.hpp"

#include "lanes.hpp"

namespace feemarket::simd::scalar {

using detail::kLanes;
using detail::LaneSum;

double sum(const double* values, std::size_t n) {
  LaneSum lanes[kLanes];
  for (std::size_t i = 0; i < n; ++i) lanes[i % kLanes].add(values[i]);
  return detail::combine(lanes);
}

double ratio_sum(const double* num, const double* den, std::size_t n) {
  LaneSum lanes[kLanes];
  for (std::size_t i = 0; i < n; ++i) lanes[i % kLanes].add(num[i] / den[i]);
  return detail::combine(lanes);
}

std::size_t count_at_least(const double* values, std::size_t n, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += values[i] >= threshold ? 1 : 0;
  return count;
}

}  // namespace feemarket::simd::scalar
