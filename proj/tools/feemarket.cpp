// feemarket: simulate, sweep, bound, analyze, check-proper.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "feemarket/analysis.hpp"
#include "feemarket/chaindata.hpp"
#include "feemarket/config.hpp"
#include "feemarket/core.hpp"
#include "feemarket/demand.hpp"
#include "feemarket/engine.hpp"
#include "feemarket/io.hpp"
#include "feemarket/sweep.hpp"

namespace fm = feemarket;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBoundViolation = 4;

[[noreturn]] void config_error(const std::string& message) {
  throw fm::Error(fm::ErrorKind::ConfigError, message);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fm::Error(fm::ErrorKind::InvariantError, "cannot write " + path.string());
  return out;
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FEEMARKET_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long value = std::stoul(env, &used);
      if (used == std::string(env).size()) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
    }
    config_error("FEEMARKET_THREADS: expected a non-negative integer");
  }
  return 0;
}

json bound_json(const fm::analysis::BoundReport& report) {
  return json{{"d", report.d},
              {"target", report.target},
              {"lower_bound", report.lower_bound},
              {"upper_bound", report.upper_bound},
              {"factor", report.factor}};
}

// Common config flags. Flags override the config file, which overrides defaults.
struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> d;
  std::optional<double> b0;
  std::optional<std::size_t> n_iter;
  std::optional<std::size_t> n_skip;
  std::optional<std::size_t> long_n;

  void attach(CLI::App& cmd) {
    cmd.add_option("config", config_path, "JSON run configuration (defaults when omitted)");
    cmd.add_option("--seed", seed, "RNG seed");
    cmd.add_option("--d", d, "adjustment quotient");
    cmd.add_option("--b0", b0, "initial base fee");
    cmd.add_option("--n-iter", n_iter, "recorded blocks");
    cmd.add_option("--n-skip", n_skip, "burn-in blocks");
    cmd.add_option("--long-n", long_n, "horizon for long-run averages, burn-in included");
  }

  fm::config::RunConfig load() const {
    fm::config::RunConfig run =
        config_path.empty() ? fm::config::parse_run_config(json::object())
                            : fm::config::load_run_config(config_path);
    if (seed) run.sim.seed = *seed;
    if (d) run.sim.mechanism.d = *d;
    if (b0) run.sim.b0 = *b0;
    if (n_iter) run.sim.n_iter = *n_iter;
    if (n_skip) run.sim.n_skip = *n_skip;
    if (long_n) run.long_n = *long_n;
    fm::config::validate(run);
    return run;
  }
};

int cmd_simulate(const RunOptions& options, const std::filesystem::path& out_path) {
  const fm::config::RunConfig run = options.load();
  const fm::engine::SimConfig& sim = run.sim;
  const double limit = sim.market.limit();

  const fm::Trajectory trajectory = fm::engine::run(sim);
  {
    std::ofstream out = open_output(out_path);
    out << "n,base_fee,block_size,block_size_rel,running_avg_rel\n";
    double running = 0.0;
    for (std::size_t i = 0; i < trajectory.records.size(); ++i) {
      const fm::TrajectoryPoint& rec = trajectory.records[i];
      running += rec.block_size;
      out << rec.height << ',' << fm::io::format_number(rec.base_fee) << ','
          << fm::io::format_number(rec.block_size) << ','
          << fm::io::format_number(rec.block_size / limit) << ','
          << fm::io::format_number(running / static_cast<double>(i + 1) / limit) << '\n';
    }
  }

  const fm::engine::AverageSummary average = fm::engine::run_average(sim, run.long_n);
  json summary{{"rule", std::string(fm::to_string(sim.mechanism.rule))},
               {"records", trajectory.records.size()},
               {"final_base_fee", trajectory.final_state.base_fee},
               {"long_n", run.long_n},
               {"avg_base_fee", average.avg_base_fee},
               {"avg_block_size", average.avg_block_size},
               {"avg_block_size_rel", average.avg_block_size / limit}};
  if (sim.mechanism.uses_quotient_d()) {
    const auto bound = fm::analysis::theorem1_upper_bound(sim.mechanism.d, sim.market.target);
    summary["band"] = json::array({bound.lower_bound, bound.upper_bound});
    summary["within_band"] =
        average.avg_block_size >= bound.lower_bound - fm::analysis::kBoundSlack &&
        average.avg_block_size <= bound.upper_bound + fm::analysis::kBoundSlack;
  }
  try {
    summary["clearing_price"] = fm::market_clearing_price(sim.market, sim.mechanism.fee_floor);
  } catch (const fm::Error&) {
    summary["clearing_price"] = nullptr;
  }
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const RunOptions& options, const std::filesystem::path& out_dir,
              std::optional<unsigned> threads_flag) {
  const fm::config::RunConfig run = options.load();
  const unsigned threads = resolve_threads(threads_flag);
  const fm::sweep::SweepSpec spec = fm::config::sweep_spec(run);
  const fm::sweep::SweepDataset data = fm::sweep::run_sweep(spec, threads);

  std::filesystem::create_directories(out_dir);
  if (spec.emit_attractors) {
    std::ofstream out = open_output(out_dir / "attractors.csv");
    fm::sweep::write_attractors_csv(out, data);
  }
  if (spec.emit_averages) {
    std::ofstream out = open_output(out_dir / "averages.csv");
    fm::sweep::write_averages_csv(out, data);
  }
  std::cout << json{{"points", data.points.size()}, {"out_dir", out_dir.string()}}.dump(2)
            << '\n';
  return kExitOk;
}

int cmd_bound(double d, double target) {
  if (!(d > 0.0 && d < 1.0)) config_error("--d: d must lie in (0,1)");
  if (!(target > 0.0)) config_error("--T: target must be positive");
  std::cout << bound_json(fm::analysis::theorem1_upper_bound(d, target)).dump(2) << '\n';
  return kExitOk;
}

struct AnalyzeOptions {
  std::string data_path;
  std::size_t batch = 5000;
  double d = 0.125;
  std::optional<std::int64_t> split;
  bool strict = false;
  bool include_partial = false;
  fm::chaindata::ColumnMap columns;
  std::string target_column;
  std::filesystem::path batches_out = "batches.csv";
  std::filesystem::path report_out = "report.json";
};

int cmd_analyze(const AnalyzeOptions& options) {
  if (options.batch == 0) config_error("--batch: must be positive");
  if (!(options.d > 0.0 && options.d < 1.0)) config_error("--d: d must lie in (0,1)");
  fm::chaindata::ColumnMap columns = options.columns;
  if (!options.target_column.empty()) columns.target = options.target_column;

  const auto records = fm::chaindata::ingest_csv(options.data_path, columns);
  const auto batches = fm::chaindata::batch_averages(records, options.batch);
  const auto report =
      fm::chaindata::bound_comparison(batches, options.d, options.split, options.include_partial);
  {
    std::ofstream out = open_output(options.batches_out);
    fm::chaindata::write_batches_csv(out, batches);
  }
  const std::string text = fm::chaindata::to_json(report).dump(2);
  {
    std::ofstream out = open_output(options.report_out);
    out << text << '\n';
  }
  std::cout << text << '\n';
  return options.strict && report.any_aggregate_violation() ? kExitBoundViolation : kExitOk;
}

json probe_json(const fm::ProbeResult& probe) {
  return json{{"base_fee", probe.base_fee},
              {"block_size", probe.block_size},
              {"min_effective_price", probe.min_effective_price},
              {"next_fee", probe.next_fee},
              {"non_divergent", probe.non_divergent}};
}

json differences_json(const fm::BoundedDifferences& diff) {
  return json{{"alpha", diff.alpha}, {"beta", diff.beta}, {"holds", diff.holds}};
}

int cmd_check_proper(const RunOptions& options, std::optional<std::string> rule,
                     std::size_t probe_count, bool verbose) {
  fm::config::RunConfig run = options.load();
  if (rule) {
    const auto parsed = fm::parse_rule(*rule);
    if (!parsed) config_error("--rule: expected eip1559, exp1559, amm, wel, twel or egpcure");
    run.sim.mechanism.rule = *parsed;
    fm::config::validate(run);
  }
  const auto& mechanism = run.sim.mechanism;
  const auto fees = fm::default_probe_fees(mechanism, run.sim.market, probe_count);
  const fm::PropernessReport report = fm::check_properness(mechanism, run.sim.market, fees);

  json out{{"rule", std::string(fm::to_string(report.rule))},
           {"probes", report.probes.size()},
           {"a1_applicable", report.a1_applicable},
           {"a1_holds", report.a1_holds},
           {"a1_violations", report.a1_violations.size()},
           {"alpha_up", report.alpha_up},
           {"alpha_down", report.alpha_down},
           {"a2", differences_json(report.a2)}};
  if (report.a2_prime) out["a2_prime"] = differences_json(*report.a2_prime);
  if (verbose) {
    json list = json::array();
    for (const auto& probe : report.probes) list.push_back(probe_json(probe));
    out["probe_results"] = std::move(list);
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIP-1559 family fee-market simulator"};
  app.require_subcommand(1);

  RunOptions simulate_options;
  std::filesystem::path simulate_out = "trajectory.csv";
  auto* simulate = app.add_subcommand("simulate", "run one trajectory and summarise it");
  simulate_options.attach(*simulate);
  simulate->add_option("--out", simulate_out, "trajectory CSV path");

  RunOptions sweep_options;
  std::filesystem::path sweep_out = ".";
  std::optional<unsigned> sweep_threads;
  auto* sweep = app.add_subcommand("sweep", "bifurcation sweep over d or w");
  sweep_options.attach(*sweep);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--threads", sweep_threads, "worker cap (default: all cores)");

  double bound_d = 0.125;
  double bound_target = 1.0;
  auto* bound = app.add_subcommand("bound", "long-run average block size band");
  bound->add_option("--d", bound_d, "adjustment quotient")->required();
  bound->add_option("--T", bound_target, "target block size");

  AnalyzeOptions analyze_options;
  auto* analyze = app.add_subcommand("analyze", "batch averages of historical block data");
  analyze->add_option("data", analyze_options.data_path, "CSV of per-block gas records")
      ->required();
  analyze->add_option("--batch", analyze_options.batch, "blocks per batch");
  analyze->add_option("--d", analyze_options.d, "adjustment quotient for the band");
  analyze->add_option("--split", analyze_options.split, "first block of the post period");
  analyze->add_flag("--strict", analyze_options.strict, "exit 4 when an aggregate leaves the band");
  analyze->add_flag("--include-partial", analyze_options.include_partial,
                    "count a short trailing batch in aggregates");
  analyze->add_option("--number-col", analyze_options.columns.number, "block number column");
  analyze->add_option("--gas-used-col", analyze_options.columns.gas_used, "gas used column");
  analyze->add_option("--gas-limit-col", analyze_options.columns.gas_limit, "gas limit column");
  analyze->add_option("--target-col", analyze_options.target_column,
                      "per-block target column (default: gas limit / 2)");
  analyze->add_option("--batches-out", analyze_options.batches_out, "batch CSV path");
  analyze->add_option("--report-out", analyze_options.report_out, "report JSON path");

  RunOptions proper_options;
  std::optional<std::string> proper_rule;
  std::size_t proper_probes = 64;
  bool proper_verbose = false;
  auto* proper = app.add_subcommand("check-proper", "probe non-divergence and bounded differences");
  proper_options.attach(*proper);
  proper->add_option("--rule", proper_rule, "rule to check");
  proper->add_option("--probes", proper_probes, "probe count");
  proper->add_flag("--verbose", proper_verbose, "list every probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(simulate_options, simulate_out);
    if (*sweep) return cmd_sweep(sweep_options, sweep_out, sweep_threads);
    if (*bound) return cmd_bound(bound_d, bound_target);
    if (*analyze) return cmd_analyze(analyze_options);
    if (*proper) {
      return cmd_check_proper(proper_options, proper_rule, proper_probes, proper_verbose);
    }
  } catch (const fm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == fm::ErrorKind::ConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
