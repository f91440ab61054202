#pragma once

// One-step base fee update rules. Every rule clamps its result to `floor`.

#include <span>

#include "feemarket/core.hpp"

namespace feemarket::mechanisms {

/// b * (1 + d * (g - T) / T)
double step_eip1559(double base_fee, double block_size, double d, double target,
                    double floor = kDefaultFeeFloor);

/// b * (1 + d)^((g - T) / T)
double step_exp1559(double base_fee, double block_size, double d, double target,
                    double floor = kDefaultFeeFloor);

/// Excess gas x' = max{0, x + g - T}, base fee q * exp(q * x').
FeeState step_amm(const FeeState& state, double block_size, double q, double target);

/// Closed form b * exp(q * max{-x, g - T}); equals step_amm's fee whenever
/// b = q * exp(q * x).
double amm_closed_form(double base_fee, double excess_gas, double block_size,
                       double q, double target);

/// Excess gas consistent with a base fee on the AMM curve (0 below q).
double amm_excess_gas_for_fee(double base_fee, double q);

/// (alpha / kT) * sum(v) + (1 - alpha) * b
double step_wel(double base_fee, std::span<const double> included, double alpha,
                double limit, double floor = kDefaultFeeFloor);
double step_wel_total(double base_fee, double valuation_sum, double alpha,
                      double limit, double floor = kDefaultFeeFloor);

/// Full block: alpha * (1 + delta) * b + (1 - alpha) * b.
/// Otherwise: (alpha / kT) * sum(min{v, (1 + delta) b}) + (1 - alpha) * b.
double step_twel(double base_fee, std::span<const double> included,
                 double block_size, double alpha, double delta, double limit,
                 double floor = kDefaultFeeFloor);
double step_twel_total(double base_fee, double truncated_sum, double block_size,
                       double alpha, double delta, double limit,
                       double floor = kDefaultFeeFloor);

/// EIP-1559 update plus intensity * max{0, m - (1 + gamma) b}.
double step_egpcure(double base_fee, double block_size, double min_effective_price,
                    double d, double intensity, double gamma, double target,
                    double floor = kDefaultFeeFloor);

/// True when the block is at the limit (relative tolerance 1e-12).
bool is_full_block(double block_size, double limit) noexcept;

}  // namespace feemarket::mechanisms
