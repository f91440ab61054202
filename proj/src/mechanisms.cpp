#include "feemarket/mechanisms.hpp"

#include <algorithm>
#include <cmath>

namespace feemarket::mechanisms {

namespace {

double clamp_floor(double fee, double floor) { return std::max(fee, floor); }

}  // namespace

bool is_full_block(double block_size, double limit) noexcept {
  return block_size >= limit * (1.0 - 1e-12);
}

double step_eip1559(double base_fee, double block_size, double d, double target,
                    double floor) {
  const double deviation = (block_size - target) / target;
  return clamp_floor(base_fee * (1.0 + d * deviation), floor);
}

double step_exp1559(double base_fee, double block_size, double d, double target,
                    double floor) {
  const double deviation = (block_size - target) / target;
  return clamp_floor(base_fee * std::pow(1.0 + d, deviation), floor);
}

FeeState step_amm(const FeeState& state, double block_size, double q, double target) {
  FeeState next;
  next.height = state.height + 1;
  next.excess_gas = std::max(0.0, state.excess_gas + block_size - target);
  next.base_fee = q * std::exp(q * next.excess_gas);
  return next;
}

double amm_closed_form(double base_fee, double excess_gas, double block_size, double q,
                       double target) {
  return base_fee * std::exp(q * std::max(-excess_gas, block_size - target));
}

double amm_excess_gas_for_fee(double base_fee, double q) {
  if (!(base_fee > q)) return 0.0;
  return std::log(base_fee / q) / q;
}

double step_wel_total(double base_fee, double valuation_sum, double alpha, double limit,
                      double floor) {
  return clamp_floor(alpha / limit * valuation_sum + (1.0 - alpha) * base_fee, floor);
}

double step_wel(double base_fee, std::span<const double> included, double alpha,
                double limit, double floor) {
  double total = 0.0;
  for (double v : included) total += v;
  return step_wel_total(base_fee, total, alpha, limit, floor);
}

double step_twel_total(double base_fee, double truncated_sum, double block_size,
                       double alpha, double delta, double limit, double floor) {
  if (is_full_block(block_size, limit)) {
    return clamp_floor(alpha * (1.0 + delta) * base_fee + (1.0 - alpha) * base_fee, floor);
  }
  return clamp_floor(alpha / limit * truncated_sum + (1.0 - alpha) * base_fee, floor);
}

double step_twel(double base_fee, std::span<const double> included, double block_size,
                 double alpha, double delta, double limit, double floor) {
  const double cap = (1.0 + delta) * base_fee;
  double total = 0.0;
  for (double v : included) total += std::min(v, cap);
  return step_twel_total(base_fee, total, block_size, alpha, delta, limit, floor);
}

double step_egpcure(double base_fee, double block_size, double min_effective_price,
                    double d, double intensity, double gamma, double target,
                    double floor) {
  const double linear = base_fee * (1.0 + d * (block_size - target) / target);
  const double correction =
      intensity * std::max(0.0, min_effective_price - (1.0 + gamma) * base_fee);
  return clamp_floor(linear + correction, floor);
}

}  // namespace feemarket::mechanisms
