#pragma once

// Trajectory runner: burn-in, recording and per-block random streams.

#include <cstddef>
#include <cstdint>

#include "feemarket/core.hpp"
#include "feemarket/demand.hpp"

namespace feemarket::engine {

inline constexpr std::size_t kDefaultSkip = 200;
inline constexpr std::size_t kDefaultIterations = 100;
inline constexpr std::size_t kDefaultLongHorizon = 100000;

struct SimConfig {
  MarketParams market{};
  MechanismSpec mechanism{};
  DemandModel demand{};
  double b0 = 170.0;
  std::size_t n_skip = kDefaultSkip;
  std::size_t n_iter = kDefaultIterations;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // trajectory id within a batch of runs
  bool record_all = false;   // also keep the burn-in blocks
};

void validate(const SimConfig& config);

/// Initial state for a config. For Amm the excess gas is the one placing b0 on
/// the q * exp(q x) curve, and the fee is snapped onto that curve.
FeeState initial_state(const SimConfig& config);

/// Stateful stepper over one trajectory.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  /// Produces the block at the current height and advances the fee state.
  TrajectoryPoint advance();

  const FeeState& state() const noexcept { return state_; }

 private:
  SimConfig config_;
  FeeState state_;
};

/// Runs n_skip + n_iter blocks and records the last n_iter (or all of them).
Trajectory run(const SimConfig& config);

struct AverageSummary {
  double avg_base_fee = 0.0;
  double avg_block_size = 0.0;
  std::size_t count = 0;
  double first_base_fee = 0.0;  // fee of the first averaged block (b_1)
  FeeState final_state{};       // after the last averaged block (b_{N+1})
  double deviation_sum = 0.0;   // sum of (g_n - T), compensated
};

/// Averages over blocks n_skip .. long_n - 1 (long_n counts the burn-in).
AverageSummary run_average(const SimConfig& config,
                           std::size_t long_n = kDefaultLongHorizon);

}  // namespace feemarket::engine
