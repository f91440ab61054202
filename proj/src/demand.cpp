#include "feemarket/demand.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "feemarket/simd/kernels.hpp"

namespace feemarket {

namespace {

double gamma_shift(const ValuationDist& dist) { return dist.m - dist.shape() * dist.w; }

double simpson_step(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  if (!(b > a)) return 0.0;
  // Split the range first so narrow features are not skipped by the first probe.
  constexpr int kPanels = 16;
  const double h = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + h * i;
    const double hi = i + 1 == kPanels ? b : a + h * (i + 1);
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / kPanels, 40);
  }
  return total;
}

}  // namespace

double survival(const ValuationDist& dist, double x) {
  switch (dist.kind) {
    case ValuationKind::Uniform: {
      const double lo = dist.m - 0.5 * dist.w;
      const double hi = dist.m + 0.5 * dist.w;
      if (x <= lo) return 1.0;
      if (x >= hi) return 0.0;
      return (hi - x) / dist.w;
    }
    case ValuationKind::Normal: {
      const double sigma = 0.25 * dist.w;
      return 0.5 * std::erfc((x - dist.m) / (sigma * std::numbers::sqrt2));
    }
    case ValuationKind::ShiftedGamma:
    case ValuationKind::ShiftedExponential: {
      const double z = (x - gamma_shift(dist)) / dist.w;
      if (z <= 0.0) return 1.0;
      return boost::math::gamma_q(dist.shape(), z);
    }
  }
  return 0.0;
}

double inverse_survival(const ValuationDist& dist, double p, double lo, double hi) {
  if (!(survival(dist, lo) >= p) || !(survival(dist, hi) <= p)) {
    throw Error(ErrorKind::NoClearingPrice,
                "survival level " + std::to_string(p) + " is not attained on [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  // Invariant: survival(lo) >= p >= survival(hi). Bisect to full precision.
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (survival(dist, mid) >= p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double market_clearing_price(const MarketParams& market, double fee_floor) {
  if (!(market.lambda > 1.0)) {
    throw Error(ErrorKind::NoClearingPrice, "lambda must exceed 1 for a clearing price");
  }
  const ValuationDist& dist = market.valuation;
  const double lo = fee_floor > 0.0 ? fee_floor : kDefaultFeeFloor;
  const double hi = dist.m + 10.0 * dist.w;
  return inverse_survival(dist, 1.0 / market.lambda, lo, hi);
}

double mean_field_block_size(double base_fee, const MarketParams& market) {
  const double demand = market.lambda * market.target * survival(market.valuation, base_fee);
  return std::min(market.limit(), demand);
}

double integration_cutoff(const ValuationDist& dist) {
  switch (dist.kind) {
    case ValuationKind::Uniform:
      return dist.m + 0.5 * dist.w;
    case ValuationKind::Normal:
      return dist.m + 10.0 * dist.w;  // 40 standard deviations
    case ValuationKind::ShiftedGamma:
    case ValuationKind::ShiftedExponential: {
      const double a = dist.shape();
      return gamma_shift(dist) + dist.w * (a + 60.0 + 10.0 * std::sqrt(a));
    }
  }
  return dist.m;
}

double partial_expectation(const ValuationDist& dist, double lo, double hi) {
  // Survival is 1 below these points to double precision, so starting there
  // leaves lo * S(lo) + integral(S) unchanged.
  double floor_point = dist.lower_support();
  if (dist.kind == ValuationKind::Normal) floor_point = dist.m - 10.0 * dist.w;
  lo = std::max(lo, floor_point);
  hi = std::min(hi, integration_cutoff(dist));
  if (!(hi > lo)) return 0.0;
  const auto tail = [&dist](double v) { return survival(dist, v); };
  const double tol = 1e-8 * std::max(1.0, std::fabs(hi));
  // integral over [lo, hi] of v dF = lo S(lo) - hi S(hi) + integral of S.
  return lo * survival(dist, lo) - hi * survival(dist, hi) +
         adaptive_simpson(tail, lo, hi, tol);
}

ValuationTotals mean_field_valuation_totals(double base_fee, const MarketParams& market,
                                            double truncate_at) {
  const ValuationDist& dist = market.valuation;
  const double scale = market.lambda * market.target;
  const double cutoff = integration_cutoff(dist);
  double threshold = base_fee;
  if (scale * survival(dist, base_fee) > market.limit()) {
    // Greedy inclusion keeps only the top kT of the arrivals.
    threshold = inverse_survival(dist, market.limit() / scale, base_fee,
                                 std::max(cutoff, base_fee));
  }
  ValuationTotals totals;
  totals.sum = scale * partial_expectation(dist, threshold, cutoff);
  if (truncate_at <= threshold) {
    totals.truncated_sum = scale * truncate_at * survival(dist, threshold);
  } else {
    totals.truncated_sum = scale * (partial_expectation(dist, threshold, truncate_at) +
                                    truncate_at * survival(dist, truncate_at));
  }
  return totals;
}

double sample_standard_normal(RngStream& rng) {
  const double u1 = rng.uniform_open0();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform_open0(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double z = sample_standard_normal(rng);
    const double base = 1.0 + c * z;
    if (base <= 0.0) continue;
    const double v = base * base * base;
    const double u = rng.uniform_open0();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

double sample_valuation(const ValuationDist& dist, RngStream& rng) {
  switch (dist.kind) {
    case ValuationKind::Uniform:
      return dist.m - 0.5 * dist.w + dist.w * rng.uniform();
    case ValuationKind::Normal:
      return dist.m + 0.25 * dist.w * sample_standard_normal(rng);
    case ValuationKind::ShiftedGamma:
    case ValuationKind::ShiftedExponential:
      return gamma_shift(dist) + dist.w * sample_gamma(dist.shape(), rng);
  }
  return dist.m;
}

std::uint64_t sample_poisson(double mean, RngStream& rng) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = rng.uniform_open0();
    while (p > limit) {
      ++k;
      p *= rng.uniform_open0();
    }
    return k;
  }
  // Hoermann's transformed rejection with squeeze (PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::uint64_t block_capacity(const MarketParams& market) {
  return static_cast<std::uint64_t>(std::floor(market.limit() + 1e-9));
}

SampledBlock stochastic_block_size(double base_fee, const MarketParams& market,
                                   ArrivalKind arrivals, RngStream& rng) {
  const double expected = market.lambda * market.target;
  SampledBlock block;
  block.arrivals = arrivals == ArrivalKind::Deterministic
                       ? static_cast<std::uint64_t>(std::llround(expected))
                       : sample_poisson(expected, rng);

  std::vector<double> valuations(block.arrivals);
  for (double& v : valuations) v = sample_valuation(market.valuation, rng);

  const std::size_t willing = simd::count_at_least(valuations, base_fee);
  block.included.reserve(willing);
  for (double v : valuations) {
    if (v >= base_fee) block.included.push_back(v);
  }
  const std::size_t capacity = block_capacity(market);
  if (block.included.size() > capacity) {
    std::nth_element(block.included.begin(),
                     block.included.begin() + static_cast<std::ptrdiff_t>(capacity),
                     block.included.end(), std::greater<>());
    block.included.resize(capacity);
  }
  std::sort(block.included.begin(), block.included.end(), std::greater<>());
  block.block_size = static_cast<double>(block.included.size());
  block.min_effective_price = block.included.empty() ? base_fee : block.included.back();
  return block;
}

}  // namespace feemarket
