#pragma once

// Historical block gas records: CSV ingestion, fixed-size batch averages and
// comparison against the long-run EIP-1559 band.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace feemarket::chaindata {

struct ColumnMap {
  std::string number = "number";
  std::string gas_used = "gas_used";
  std::string gas_limit = "gas_limit";
  /// Optional per-block target column; without it the target is gas_limit / 2.
  std::optional<std::string> target;
};

struct BlockRecord {
  std::int64_t number = 0;
  double gas_used = 0.0;
  double gas_limit = 0.0;
  double target = 0.0;
};

std::vector<BlockRecord> parse_csv(std::istream& in, const ColumnMap& columns = {});
std::vector<BlockRecord> ingest_csv(const std::filesystem::path& path,
                                    const ColumnMap& columns = {});

struct BatchSummary {
  std::size_t batch_index = 0;
  std::int64_t first_block = 0;
  double avg_relative_size = 0.0;  // mean of gas_used / gas_limit
  double avg_target_ratio = 0.0;   // mean of gas_used / target
  std::size_t count = 0;
  bool partial = false;            // trailing batch shorter than batch_size
};

std::vector<BatchSummary> batch_averages(std::span<const BlockRecord> records,
                                         std::size_t batch_size);

struct AggregateStats {
  double mean_relative = 0.0;
  double mean_target_ratio = 0.0;
  double overshoot_pct = 0.0;  // (mean_target_ratio - 1) * 100
  std::size_t batches = 0;
  std::size_t blocks = 0;
  bool within_band = true;
};

struct ComparisonReport {
  double d = 0.125;
  double band_lo = 1.0;  // in multiples of the target
  double band_hi = 1.0;
  AggregateStats overall{};
  std::optional<std::int64_t> split_height;
  std::optional<AggregateStats> pre;
  std::optional<AggregateStats> post;
  std::vector<std::size_t> above_band;  // batch indices
  std::vector<std::size_t> below_band;
  std::optional<std::size_t> partial_batch;
  bool include_partial = false;

  bool any_aggregate_violation() const;
};

/// Per-batch and aggregate comparison of the target ratio against
/// [1, 2 * factor(d)]. With `split_height`, batches whose first block precedes
/// the split form the "pre" aggregate and the rest "post". Trailing partial
/// batches are left out of aggregates unless `include_partial` is set.
ComparisonReport bound_comparison(std::span<const BatchSummary> summaries, double d,
                                  std::optional<std::int64_t> split_height = std::nullopt,
                                  bool include_partial = false);

/// batch_index,first_block,avg_relative_size,count
void write_batches_csv(std::ostream& out, std::span<const BatchSummary> summaries);

nlohmann::json to_json(const ComparisonReport& report);

}  // namespace feemarket::chaindata
