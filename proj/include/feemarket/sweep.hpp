#pragma once

// Bifurcation sweeps over the adjustment quotient or the valuation width.

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "feemarket/analysis.hpp"
#include "feemarket/engine.hpp"

namespace feemarket::sweep {

enum class SweepParameter { AdjustmentQuotient, ValuationWidth };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::AdjustmentQuotient;
  std::vector<double> grid;
  engine::SimConfig base_config{};
  std::size_t long_n = engine::kDefaultLongHorizon;
  bool emit_attractors = true;
  bool emit_averages = true;
};

struct SweepPoint {
  double value = 0.0;
  std::vector<TrajectoryPoint> attractor;
  engine::AverageSummary average{};
  std::optional<analysis::BoundReport> bound;
};

struct SweepDataset {
  SweepParameter parameter = SweepParameter::AdjustmentQuotient;
  double limit = 2.0;  // kT, used to normalise block sizes
  std::vector<SweepPoint> points;  // grid order
};

/// d in {0.005, ..., 0.5} or w in {0.2, ..., 20}, 100 points each.
std::vector<double> default_grid(SweepParameter parameter);

void validate(const SweepSpec& spec);

/// Config used for grid point `index`: the parameter applied and the random
/// stream set to the index.
engine::SimConfig config_for(const SweepSpec& spec, std::size_t index);

/// Evaluates every grid point; `threads` = 0 picks the hardware concurrency.
/// Output order and values do not depend on the thread count.
SweepDataset run_sweep(const SweepSpec& spec, unsigned threads = 0);

/// param_value,sample_index,base_fee,block_size_rel
void write_attractors_csv(std::ostream& out, const SweepDataset& data);
/// param_value,avg_base_fee,avg_block_size_rel,theory_upper_rel
void write_averages_csv(std::ostream& out, const SweepDataset& data);

}  // namespace feemarket::sweep
