#include "feemarket/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "feemarket/io.hpp"

namespace feemarket::sweep {

std::vector<double> default_grid(SweepParameter parameter) {
  const double step = parameter == SweepParameter::AdjustmentQuotient ? 0.005 : 0.2;
  std::vector<double> grid;
  grid.reserve(100);
  for (int i = 1; i <= 100; ++i) grid.push_back(step * i);
  return grid;
}

void validate(const SweepSpec& spec) {
  if (spec.grid.empty()) throw Error(ErrorKind::DomainError, "sweep grid must be nonempty");
  for (double value : spec.grid) {
    if (spec.parameter == SweepParameter::AdjustmentQuotient) {
      if (!(value > 0.0 && value <= 0.5)) {
        throw Error(ErrorKind::DomainError, "sweep grid values for d must lie in (0,0.5]");
      }
    } else if (!(value > 0.0)) {
      throw Error(ErrorKind::DomainError, "sweep grid values for w must be positive");
    }
  }
  if (spec.parameter == SweepParameter::AdjustmentQuotient &&
      !spec.base_config.mechanism.uses_quotient_d()) {
    throw Error(ErrorKind::DomainError, "d sweep requires a rule with an adjustment quotient d");
  }
  if (spec.emit_averages && spec.long_n < spec.base_config.n_skip + 1) {
    throw Error(ErrorKind::DomainError, "long_n must exceed n_skip");
  }
}

engine::SimConfig config_for(const SweepSpec& spec, std::size_t index) {
  engine::SimConfig config = spec.base_config;
  if (spec.parameter == SweepParameter::AdjustmentQuotient) {
    config.mechanism.d = spec.grid[index];
  } else {
    config.market.valuation.w = spec.grid[index];
  }
  config.stream = index;
  return config;
}

namespace {

SweepPoint evaluate(const SweepSpec& spec, std::size_t index) {
  const engine::SimConfig config = config_for(spec, index);
  SweepPoint point;
  point.value = spec.grid[index];
  if (spec.emit_attractors) point.attractor = engine::run(config).records;
  if (spec.emit_averages) point.average = engine::run_average(config, spec.long_n);
  if (config.mechanism.uses_quotient_d()) {
    point.bound = analysis::theorem1_upper_bound(config.mechanism.d, config.market.target);
  }
  return point;
}

}  // namespace

SweepDataset run_sweep(const SweepSpec& spec, unsigned threads) {
  validate(spec);
  engine::validate(spec.base_config);

  SweepDataset data;
  data.parameter = spec.parameter;
  data.limit = spec.base_config.market.limit();
  data.points.resize(spec.grid.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(spec.grid.size()));

  // Work items are claimed from a shared counter; each result lands in its own
  // slot, so assembly order is fixed by the grid.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= spec.grid.size()) return;
      try {
        data.points[index] = evaluate(spec, index);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(spec.grid.size());
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return data;
}

void write_attractors_csv(std::ostream& out, const SweepDataset& data) {
  out << "param_value,sample_index,base_fee,block_size_rel\n";
  for (const SweepPoint& point : data.points) {
    for (std::size_t i = 0; i < point.attractor.size(); ++i) {
      const TrajectoryPoint& rec = point.attractor[i];
      out << io::format_number(point.value) << ',' << i << ','
          << io::format_number(rec.base_fee) << ','
          << io::format_number(rec.block_size / data.limit) << '\n';
    }
  }
}

void write_averages_csv(std::ostream& out, const SweepDataset& data) {
  out << "param_value,avg_base_fee,avg_block_size_rel,theory_upper_rel\n";
  for (const SweepPoint& point : data.points) {
    out << io::format_number(point.value) << ',' << io::format_number(point.average.avg_base_fee)
        << ',' << io::format_number(point.average.avg_block_size / data.limit) << ',';
    if (point.bound) out << io::format_number(point.bound->upper_bound / data.limit);
    out << '\n';
  }
}

}  // namespace feemarket::sweep
