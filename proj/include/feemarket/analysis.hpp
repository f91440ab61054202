#pragma once

// Closed-form bounds on long-run average block sizes, logarithm chords,
// time averages and convergence gaps.

#include <cstddef>
#include <span>
#include <vector>

#include "feemarket/core.hpp"

namespace feemarket::analysis {

/// Absolute slack used when comparing simulated values against closed forms.
inline constexpr double kBoundSlack = 1e-9;

struct BoundReport {
  double d = 0.0;
  double target = 1.0;
  double lower_bound = 0.0;  // T
  double upper_bound = 0.0;  // [1 - ln(1+d)/ln(1-d)]^-1 * 2T
  double factor = 0.0;       // upper_bound / (2T)
};

/// Long-run average block size band for EIP-1559 with quotient d in (0,1).
BoundReport theorem1_upper_bound(double d, double target = 1.0);

/// Chord of ln(1 + x) through x = -d and x = d: ln(1 + x) >= slope * x + intercept
/// on |x| <= d.
struct LogChord {
  double slope = 0.0;
  double intercept = 0.0;
};

LogChord lemma2_coeffs(double d);

/// Mean block size over records with index >= skip.
double time_average(const Trajectory& trajectory, std::size_t skip = 0);

/// Gap between the running average G_N and the target after N recorded blocks.
/// `measured` is G_N - T. For Exp1559 `predicted` is the telescoped identity
/// T * (ln b_{N+1} - ln b_1) / (N ln(1+d)). For Eip1559 `lower`/`upper` bracket
/// G_N - T from the logarithm chord bounds.
struct GapPoint {
  std::size_t n = 0;
  double measured = 0.0;
  double predicted = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

std::vector<GapPoint> convergence_gap(const Trajectory& trajectory,
                                      const MechanismSpec& mechanism);

/// lambda * survival((d / T) e^d) > 1
bool amm_sufficient_condition(const MarketParams& market, double d);

/// q^-1 ln(b* / q)
double amm_steady_excess_gas(double q, double b_star);

/// Number of clusters among `values` whose sorted neighbours differ by more
/// than `tolerance`.
std::size_t attractor_cardinality(std::span<const double> values, double tolerance);

/// Fixed-point detection: peak-to-peak amplitude of the last `window` fees
/// is at most 1e-6 * b_star.
bool settled_at_fixed_point(std::span<const double> fees, double b_star,
                            std::size_t window = 100);

/// Spearman rank correlation (average ranks for ties).
double rank_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace feemarket::analysis
