#include "feemarket/engine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "feemarket/mechanisms.hpp"
#include "feemarket/simd/kernels.hpp"

namespace feemarket::engine {

void validate(const SimConfig& config) {
  feemarket::validate(config.market);
  feemarket::validate(config.mechanism);
  if (!(config.b0 > 0.0) || !std::isfinite(config.b0)) {
    throw Error(ErrorKind::DomainError, "b0 must be positive");
  }
  if (config.n_iter < 1) throw Error(ErrorKind::DomainError, "n_iter must be at least 1");
  if (config.demand.mode == DemandMode::Stochastic) {
    const double limit = config.market.limit();
    if (std::fabs(limit - std::round(limit)) > 1e-9) {
      throw Error(ErrorKind::DomainError,
                  "stochastic demand requires an integral block limit k*target");
    }
  }
}

FeeState initial_state(const SimConfig& config) {
  FeeState state{std::max(config.b0, config.mechanism.fee_floor), 0, 0.0};
  if (config.mechanism.rule == Rule::Amm) {
    const double q = config.mechanism.q;
    state.excess_gas = mechanisms::amm_excess_gas_for_fee(config.b0, q);
    state.base_fee = q * std::exp(q * state.excess_gas);
  }
  return state;
}

Simulator::Simulator(const SimConfig& config) : config_(config), state_(initial_state(config)) {
  validate(config_);
}

TrajectoryPoint Simulator::advance() {
  const double fee = state_.base_fee;
  const MarketParams& market = config_.market;
  const MechanismSpec& mech = config_.mechanism;

  BlockObservation block;
  if (config_.demand.mode == DemandMode::MeanField) {
    block.block_size = mean_field_block_size(fee, market);
    block.min_effective_price = fee;
    if (mech.rule == Rule::Wel || mech.rule == Rule::TWel) {
      block.valuations = mean_field_valuation_totals(fee, market, (1.0 + mech.delta) * fee);
    }
  } else {
    RngStream rng = RngStream::for_block(config_.seed, config_.stream, state_.height);
    SampledBlock sampled = stochastic_block_size(fee, market, config_.demand.arrivals, rng);
    block.block_size = sampled.block_size;
    block.min_effective_price = sampled.min_effective_price;
    block.valuations = std::move(sampled.included);
  }

  const TrajectoryPoint point{state_.height, fee, block.block_size};
  state_ = step(state_, block, mech, market);
  return point;
}

Trajectory run(const SimConfig& config) {
  Simulator sim(config);
  Trajectory trajectory;
  trajectory.market = config.market;
  trajectory.mechanism = config.mechanism;
  trajectory.seed = config.seed;
  trajectory.records.reserve(config.record_all ? config.n_skip + config.n_iter : config.n_iter);
  for (std::size_t i = 0; i < config.n_skip + config.n_iter; ++i) {
    const TrajectoryPoint point = sim.advance();
    if (config.record_all || i >= config.n_skip) trajectory.records.push_back(point);
  }
  trajectory.final_state = sim.state();
  return trajectory;
}

namespace {

/// Chunked accumulation: each full chunk is reduced by the SIMD kernel and the
/// chunk totals are combined with a scalar compensated sum.
class ChunkedSum {
 public:
  void add(double x) {
    buffer_.push_back(x);
    if (buffer_.size() == kChunk) flush();
  }

  double total() {
    flush();
    return sum_ + comp_;
  }

 private:
  static constexpr std::size_t kChunk = 4096;

  void flush() {
    if (buffer_.empty()) return;
    const double x = simd::sum(buffer_);
    buffer_.clear();
    const double t = sum_ + x;
    comp_ += std::fabs(sum_) >= std::fabs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }

  std::vector<double> buffer_;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

AverageSummary run_average(const SimConfig& config, std::size_t long_n) {
  if (long_n < config.n_skip + 1) {
    throw Error(ErrorKind::DomainError, "long_n must exceed n_skip");
  }
  Simulator sim(config);
  for (std::size_t i = 0; i < config.n_skip; ++i) sim.advance();

  const double target = config.market.target;
  ChunkedSum deviations;
  ChunkedSum fees;
  AverageSummary summary;
  summary.count = long_n - config.n_skip;
  for (std::size_t i = 0; i < summary.count; ++i) {
    const TrajectoryPoint point = sim.advance();
    if (i == 0) summary.first_base_fee = point.base_fee;
    deviations.add(point.block_size - target);
    fees.add(point.base_fee);
  }
  const double n = static_cast<double>(summary.count);
  summary.deviation_sum = deviations.total();
  summary.avg_block_size = target + summary.deviation_sum / n;
  summary.avg_base_fee = fees.total() / n;
  summary.final_state = sim.state();
  return summary;
}

}  // namespace feemarket::engine
