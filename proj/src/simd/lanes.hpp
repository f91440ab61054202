#pragma once

// Lane accumulator shared by every kernel variant. Vector code reproduces
// LaneSum::add exactly, then hands its lanes back here for the tail and the
// final combination.

#include <cmath>
#include <cstddef>

namespace feemarket::simd::detail {

inline constexpr std::size_t kLanes = 4;

struct LaneSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
};

inline double combine(const LaneSum (&lanes)[kLanes]) noexcept {
  LaneSum total;
  for (const LaneSum& lane : lanes) total.add(lane.sum);
  const double comp = ((lanes[0].comp + lanes[1].comp) + lanes[2].comp) + lanes[3].comp;
  return total.sum + (total.comp + comp);
}

}  // namespace feemarket::simd::detail
