#pragma once

// Valuation distributions, the market-clearing price and block-size
// generation under mean-field or sampled demand.

#include <cstdint>
#include <vector>

#include "feemarket/core.hpp"
#include "feemarket/rng.hpp"

namespace feemarket {

enum class DemandMode { MeanField, Stochastic };
enum class ArrivalKind { Deterministic, Poisson };

struct DemandModel {
  DemandMode mode = DemandMode::MeanField;
  ArrivalKind arrivals = ArrivalKind::Poisson;  // ignored in mean-field mode
};

/// P(v >= x) for a valuation v drawn from `dist`.
double survival(const ValuationDist& dist, double x);

/// Largest x with survival(x) >= p, found by bisection on [lo, hi].
double inverse_survival(const ValuationDist& dist, double p, double lo, double hi);

/// b* with survival(b*) = 1/lambda, so that mean-field demand exactly fills
/// the target. Bisection over [fee_floor, m + 10w].
double market_clearing_price(const MarketParams& market,
                             double fee_floor = kDefaultFeeFloor);

/// min{kT, lambda * T * survival(b)}.
double mean_field_block_size(double base_fee, const MarketParams& market);

/// Upper end of the integration range for tail integrals; survival is below
/// double precision resolution past this point.
double integration_cutoff(const ValuationDist& dist);

/// E[v * 1(lo <= v)] restricted to v <= hi, i.e. the partial expectation
/// integral of v dF over [lo, hi], by adaptive Simpson on the survival function.
double partial_expectation(const ValuationDist& dist, double lo, double hi);

/// Expected included-valuation sums under mean-field demand with greedy
/// highest-value inclusion. `truncate_at` caps each valuation (TWel).
ValuationTotals mean_field_valuation_totals(double base_fee,
                                            const MarketParams& market,
                                            double truncate_at);

double sample_valuation(const ValuationDist& dist, RngStream& rng);
double sample_standard_normal(RngStream& rng);
double sample_gamma(double shape, RngStream& rng);
std::uint64_t sample_poisson(double mean, RngStream& rng);

struct SampledBlock {
  double block_size = 0.0;
  std::vector<double> included;  // descending
  double min_effective_price = 0.0;
  std::uint64_t arrivals = 0;
};

/// Number of whole transactions that fit in a block (floor of kT).
std::uint64_t block_capacity(const MarketParams& market);

/// Draws the arrivals for one block, includes every valuation >= base fee up
/// to the block capacity (highest first) and reports the lowest included
/// valuation as the minimum effective price (the base fee if the block is empty).
SampledBlock stochastic_block_size(double base_fee, const MarketParams& market,
                                   ArrivalKind arrivals, RngStream& rng);

}  // namespace feemarket
