#include "feemarket/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "feemarket/demand.hpp"
#include "feemarket/simd/kernels.hpp"

namespace feemarket::analysis {

namespace {

void require_open_unit(double d) {
  if (!(d > 0.0 && d < 1.0)) throw Error(ErrorKind::DomainError, "d must lie in (0,1)");
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

BoundReport theorem1_upper_bound(double d, double target) {
  require_open_unit(d);
  BoundReport report;
  report.d = d;
  report.target = target;
  report.lower_bound = target;
  report.factor = 1.0 / (1.0 - std::log1p(d) / std::log1p(-d));
  report.upper_bound = 2.0 * target * report.factor;
  return report;
}

LogChord lemma2_coeffs(double d) {
  require_open_unit(d);
  const double up = std::log1p(d);
  const double down = std::log1p(-d);
  return LogChord{(up - down) / (2.0 * d), 0.5 * (up + down)};
}

double time_average(const Trajectory& trajectory, std::size_t skip) {
  const auto& records = trajectory.records;
  if (records.size() <= skip) {
    throw Error(ErrorKind::EmptyWindow, "no records after skipping " + std::to_string(skip));
  }
  std::vector<double> sizes;
  sizes.reserve(records.size() - skip);
  for (std::size_t i = skip; i < records.size(); ++i) sizes.push_back(records[i].block_size);
  return simd::sum(sizes) / static_cast<double>(sizes.size());
}

std::vector<GapPoint> convergence_gap(const Trajectory& trajectory,
                                      const MechanismSpec& mechanism) {
  if (mechanism.rule != Rule::Eip1559 && mechanism.rule != Rule::Exp1559) {
    throw Error(ErrorKind::UnsupportedRule,
                "convergence gap is defined for eip1559 and exp1559 only");
  }
  require_open_unit(mechanism.d);
  const auto& records = trajectory.records;
  const double target = trajectory.market.target;
  const double d = mechanism.d;
  const LogChord chord = lemma2_coeffs(d);
  const bool exponential = mechanism.rule == Rule::Exp1559;

  std::vector<GapPoint> gaps;
  if (records.empty()) return gaps;
  gaps.reserve(records.size());
  const double log_first = std::log(records.front().base_fee);

  // Neumaier running sum of g_n - T.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double x = records[i].block_size - target;
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;

    const double n = static_cast<double>(i + 1);
    const double fee_after = i + 1 < records.size() ? records[i + 1].base_fee
                                                    : trajectory.final_state.base_fee;
    const double log_ratio = std::log(fee_after) - log_first;

    GapPoint point;
    point.n = i + 1;
    point.measured = (sum + comp) / n;
    if (exponential) {
      point.predicted = target * log_ratio / (n * std::log1p(d));
      point.lower = point.upper = point.predicted;
    } else {
      point.lower = target * log_ratio / (n * d);
      point.upper = target * log_ratio / (n * chord.slope * d) -
                    chord.intercept / (chord.slope * d) * target;
      point.predicted = point.lower;
    }
    gaps.push_back(point);
  }
  return gaps;
}

bool amm_sufficient_condition(const MarketParams& market, double d) {
  if (!(d > 0.0)) throw Error(ErrorKind::DomainError, "d must be positive");
  const double threshold = d / market.target * std::exp(d);
  return market.lambda * survival(market.valuation, threshold) > 1.0;
}

double amm_steady_excess_gas(double q, double b_star) {
  if (!(q > 0.0)) throw Error(ErrorKind::DomainError, "q must be positive");
  if (!(b_star > q)) throw Error(ErrorKind::DomainError, "b* must exceed q");
  return std::log(b_star / q) / q;
}

std::size_t attractor_cardinality(std::span<const double> values, double tolerance) {
  if (values.empty()) return 0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t clusters = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] > tolerance) ++clusters;
  }
  return clusters;
}

bool settled_at_fixed_point(std::span<const double> fees, double b_star, std::size_t window) {
  if (fees.empty()) return false;
  const std::size_t n = std::min(window, fees.size());
  const auto tail = fees.subspan(fees.size() - n);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo <= 1e-6 * b_star;
}

double rank_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::DomainError, "rank correlation needs two equal-length series");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace feemarket::analysis
