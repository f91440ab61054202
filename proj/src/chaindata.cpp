#include "feemarket/chaindata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "feemarket/analysis.hpp"
#include "feemarket/core.hpp"
#include "feemarket/io.hpp"
#include "feemarket/simd/kernels.hpp"

namespace feemarket::chaindata {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_error(std::size_t row, std::string_view column, const std::string& what) {
  throw Error(ErrorKind::ParseError,
              "row " + std::to_string(row) + ", column " + std::string(column) + ": " + what);
}

double parse_double(std::string_view text, std::size_t row, std::string_view column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    parse_error(row, column, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_height(std::string_view text, std::size_t row, std::string_view column) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) return value;
  const double as_double = parse_double(text, row, column);
  if (as_double != std::floor(as_double)) {
    parse_error(row, column, "block number must be an integer");
  }
  return static_cast<std::int64_t>(as_double);
}

std::size_t find_column(const std::vector<std::string_view>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) parse_error(1, name, "column not found in header");
  return static_cast<std::size_t>(it - header.begin());
}

AggregateStats aggregate(std::span<const BatchSummary> summaries, double lo, double hi,
                         bool include_partial, auto&& select) {
  AggregateStats stats;
  double relative = 0.0;
  double ratio = 0.0;
  for (const BatchSummary& s : summaries) {
    if ((s.partial && !include_partial) || !select(s)) continue;
    const double weight = static_cast<double>(s.count);
    relative += s.avg_relative_size * weight;
    ratio += s.avg_target_ratio * weight;
    stats.blocks += s.count;
    ++stats.batches;
  }
  if (stats.blocks > 0) {
    stats.mean_relative = relative / static_cast<double>(stats.blocks);
    stats.mean_target_ratio = ratio / static_cast<double>(stats.blocks);
    stats.overshoot_pct = (stats.mean_target_ratio - 1.0) * 100.0;
  }
  stats.within_band = stats.blocks == 0 ||
                      (stats.mean_target_ratio >= lo - analysis::kBoundSlack &&
                       stats.mean_target_ratio <= hi + analysis::kBoundSlack);
  return stats;
}

nlohmann::json to_json(const AggregateStats& stats) {
  return {{"mean_relative", stats.mean_relative},
          {"mean_target_ratio", stats.mean_target_ratio},
          {"overshoot_pct", stats.overshoot_pct},
          {"batches", stats.batches},
          {"blocks", stats.blocks},
          {"within_band", stats.within_band}};
}

}  // namespace

std::vector<BlockRecord> parse_csv(std::istream& in, const ColumnMap& columns) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "row 1: missing header row");
  const auto header = split(line);
  const std::size_t col_number = find_column(header, columns.number);
  const std::size_t col_used = find_column(header, columns.gas_used);
  const std::size_t col_limit = find_column(header, columns.gas_limit);
  const std::optional<std::size_t> col_target =
      columns.target ? std::optional(find_column(header, *columns.target)) : std::nullopt;

  struct Row {
    BlockRecord record;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      parse_error(row, "*", "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    }
    BlockRecord rec;
    rec.number = parse_height(fields[col_number], row, columns.number);
    rec.gas_used = parse_double(fields[col_used], row, columns.gas_used);
    rec.gas_limit = parse_double(fields[col_limit], row, columns.gas_limit);
    rec.target = col_target ? parse_double(fields[*col_target], row, *columns.target)
                            : 0.5 * rec.gas_limit;
    if (!(rec.gas_limit > 0.0)) {
      throw Error(ErrorKind::InvariantError, "row " + std::to_string(row) + ": gas_limit must be positive");
    }
    if (rec.gas_used < 0.0 || rec.gas_used > rec.gas_limit) {
      throw Error(ErrorKind::InvariantError,
                  "row " + std::to_string(row) + ": gas_used must lie in [0, gas_limit]");
    }
    if (!(rec.target > 0.0)) {
      throw Error(ErrorKind::InvariantError, "row " + std::to_string(row) + ": target must be positive");
    }
    rows.push_back(Row{rec, row});
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.record.number < b.record.number; });
  std::vector<BlockRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].record.number == rows[i - 1].record.number) {
      throw Error(ErrorKind::InvariantError,
                  "row " + std::to_string(rows[i].line) + ": duplicate block number " +
                      std::to_string(rows[i].record.number) + " (also on row " +
                      std::to_string(rows[i - 1].line) + ")");
    }
    records.push_back(rows[i].record);
  }
  return records;
}

std::vector<BlockRecord> ingest_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  return parse_csv(in, columns);
}

std::vector<BatchSummary> batch_averages(std::span<const BlockRecord> records,
                                         std::size_t batch_size) {
  if (batch_size < 1) throw Error(ErrorKind::DomainError, "batch size must be at least 1");
  std::vector<BatchSummary> summaries;
  std::vector<double> used, limit, target;
  for (std::size_t start = 0, index = 0; start < records.size(); start += batch_size, ++index) {
    const std::size_t end = std::min(records.size(), start + batch_size);
    used.clear();
    limit.clear();
    target.clear();
    for (std::size_t i = start; i < end; ++i) {
      used.push_back(records[i].gas_used);
      limit.push_back(records[i].gas_limit);
      target.push_back(records[i].target);
    }
    BatchSummary s;
    s.batch_index = index;
    s.first_block = records[start].number;
    s.count = end - start;
    s.partial = s.count < batch_size;
    const double n = static_cast<double>(s.count);
    s.avg_relative_size = simd::ratio_sum(used, limit) / n;
    s.avg_target_ratio = simd::ratio_sum(used, target) / n;
    summaries.push_back(s);
  }
  return summaries;
}

bool ComparisonReport::any_aggregate_violation() const {
  return !overall.within_band || (pre && !pre->within_band) || (post && !post->within_band);
}

ComparisonReport bound_comparison(std::span<const BatchSummary> summaries, double d,
                                  std::optional<std::int64_t> split_height, bool include_partial) {
  const analysis::BoundReport bound = analysis::theorem1_upper_bound(d, 1.0);
  ComparisonReport report;
  report.d = d;
  report.band_lo = bound.lower_bound;
  report.band_hi = bound.upper_bound;
  report.split_height = split_height;
  report.include_partial = include_partial;

  for (const BatchSummary& s : summaries) {
    if (s.partial) report.partial_batch = s.batch_index;
    if (s.avg_target_ratio > report.band_hi + analysis::kBoundSlack) {
      report.above_band.push_back(s.batch_index);
    } else if (s.avg_target_ratio < report.band_lo - analysis::kBoundSlack) {
      report.below_band.push_back(s.batch_index);
    }
  }

  const double lo = report.band_lo;
  const double hi = report.band_hi;
  report.overall = aggregate(summaries, lo, hi, include_partial, [](const BatchSummary&) { return true; });
  if (split_height) {
    const std::int64_t split = *split_height;
    report.pre = aggregate(summaries, lo, hi, include_partial,
                           [split](const BatchSummary& s) { return s.first_block < split; });
    report.post = aggregate(summaries, lo, hi, include_partial,
                            [split](const BatchSummary& s) { return s.first_block >= split; });
  }
  return report;
}

void write_batches_csv(std::ostream& out, std::span<const BatchSummary> summaries) {
  out << "batch_index,first_block,avg_relative_size,count\n";
  for (const BatchSummary& s : summaries) {
    out << s.batch_index << ',' << s.first_block << ',' << io::format_number(s.avg_relative_size)
        << ',' << s.count << '\n';
  }
}

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["d"] = report.d;
  j["mean_relative"] = report.overall.mean_relative;
  j["mean_target_ratio"] = report.overall.mean_target_ratio;
  j["overshoot_pct"] = report.overall.overshoot_pct;
  j["band"] = {report.band_lo, report.band_hi};
  j["band_relative"] = {0.5 * report.band_lo, 0.5 * report.band_hi};
  j["within_band"] = report.overall.within_band;
  j["batches"] = report.overall.batches;
  j["blocks"] = report.overall.blocks;
  j["pre"] = report.pre ? to_json(*report.pre) : nlohmann::json(nullptr);
  j["post"] = report.post ? to_json(*report.post) : nlohmann::json(nullptr);
  j["split_height"] = report.split_height ? nlohmann::json(*report.split_height) : nlohmann::json(nullptr);
  j["above_band"] = report.above_band;
  j["below_band"] = report.below_band;
  j["partial_batch"] = report.partial_batch ? nlohmann::json(*report.partial_batch) : nlohmann::json(nullptr);
  j["include_partial"] = report.include_partial;
  return j;
}

}  // namespace feemarket::chaindata
