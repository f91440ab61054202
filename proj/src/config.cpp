#include "feemarket/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

namespace feemarket::config {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorKind::ConfigError, message);
}

std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

const json& require_object(const json& node, std::string_view path) {
  if (!node.is_object()) config_error(std::string(path.empty() ? "<root>" : path) + ": expected an object");
  return node;
}

void reject_unknown(const json& node, std::string_view path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& item : node.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) config_error(join(path, item.key()) + ": unknown key");
  }
}

void read_number(const json& node, std::string_view path, std::string_view key, double& out) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return;
  if (!it->is_number()) config_error(join(path, key) + ": expected a number");
  out = it->get<double>();
}

template <typename Int>
void read_count(const json& node, std::string_view path, std::string_view key, Int& out) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    config_error(join(path, key) + ": expected a non-negative integer");
  }
  out = it->get<Int>();
}

void read_bool(const json& node, std::string_view path, std::string_view key, bool& out) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return;
  if (!it->is_boolean()) config_error(join(path, key) + ": expected true or false");
  out = it->get<bool>();
}

std::optional<std::string> read_string(const json& node, std::string_view path, std::string_view key) {
  const auto it = node.find(std::string(key));
  if (it == node.end()) return std::nullopt;
  if (!it->is_string()) config_error(join(path, key) + ": expected a string");
  return it->get<std::string>();
}

ValuationDist parse_valuation(const json& node, std::string_view path) {
  require_object(node, path);
  reject_unknown(node, path, {"kind", "m", "w", "a"});
  ValuationDist dist;
  if (auto kind = read_string(node, path, "kind")) {
    auto parsed = parse_valuation_kind(*kind);
    if (!parsed) config_error(join(path, "kind") + ": expected uniform, normal, gamma or exponential");
    dist.kind = *parsed;
  }
  read_number(node, path, "m", dist.m);
  read_number(node, path, "w", dist.w);
  read_number(node, path, "a", dist.a);
  return dist;
}

MarketParams parse_market(const json& node) {
  constexpr std::string_view path = "market";
  require_object(node, path);
  reject_unknown(node, path, {"target", "k", "lambda", "valuation"});
  MarketParams market;
  read_number(node, path, "target", market.target);
  read_count(node, path, "k", market.k);
  read_number(node, path, "lambda", market.lambda);
  if (node.contains("valuation")) market.valuation = parse_valuation(node["valuation"], "market.valuation");
  return market;
}

MechanismSpec parse_mechanism(const json& node) {
  constexpr std::string_view path = "mechanism";
  require_object(node, path);
  reject_unknown(node, path,
                 {"rule", "d", "q", "alpha_wel", "delta", "gamma", "intensity", "fee_floor"});
  MechanismSpec spec;
  if (auto rule = read_string(node, path, "rule")) {
    auto parsed = parse_rule(*rule);
    if (!parsed) config_error("mechanism.rule: expected eip1559, exp1559, amm, wel, twel or egpcure");
    spec.rule = *parsed;
  }
  read_number(node, path, "d", spec.d);
  read_number(node, path, "q", spec.q);
  read_number(node, path, "alpha_wel", spec.alpha_wel);
  read_number(node, path, "delta", spec.delta);
  read_number(node, path, "gamma", spec.gamma);
  read_number(node, path, "intensity", spec.intensity);
  read_number(node, path, "fee_floor", spec.fee_floor);
  return spec;
}

DemandModel parse_demand(const json& node) {
  constexpr std::string_view path = "demand";
  require_object(node, path);
  reject_unknown(node, path, {"mode", "arrivals"});
  DemandModel demand;
  if (auto mode = read_string(node, path, "mode")) {
    if (*mode == "mean_field") demand.mode = DemandMode::MeanField;
    else if (*mode == "stochastic") demand.mode = DemandMode::Stochastic;
    else config_error("demand.mode: expected mean_field or stochastic");
  }
  if (auto arrivals = read_string(node, path, "arrivals")) {
    if (*arrivals == "deterministic") demand.arrivals = ArrivalKind::Deterministic;
    else if (*arrivals == "poisson") demand.arrivals = ArrivalKind::Poisson;
    else config_error("demand.arrivals: expected deterministic or poisson");
  }
  return demand;
}

std::vector<double> parse_grid(const json& node) {
  constexpr std::string_view path = "sweep.grid";
  std::vector<double> grid;
  if (node.is_array()) {
    for (const auto& value : node) {
      if (!value.is_number()) config_error(std::string(path) + ": expected numbers");
      grid.push_back(value.get<double>());
    }
    return grid;
  }
  require_object(node, path);
  reject_unknown(node, path, {"start", "stop", "count"});
  double start = 0.0, stop = 0.0;
  std::size_t count = 0;
  if (!node.contains("start") || !node.contains("stop") || !node.contains("count")) {
    config_error(std::string(path) + ": range needs start, stop and count");
  }
  read_number(node, path, "start", start);
  read_number(node, path, "stop", stop);
  read_count(node, path, "count", count);
  if (count == 0) config_error(std::string(path) + ".count: must be positive");
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(count == 1 ? start
                              : start + (stop - start) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
  }
  return grid;
}

sweep::SweepSpec parse_sweep(const json& node) {
  constexpr std::string_view path = "sweep";
  require_object(node, path);
  reject_unknown(node, path, {"parameter", "grid", "emit_attractors", "emit_averages"});
  sweep::SweepSpec spec;
  if (auto parameter = read_string(node, path, "parameter")) {
    if (*parameter == "d") spec.parameter = sweep::SweepParameter::AdjustmentQuotient;
    else if (*parameter == "w") spec.parameter = sweep::SweepParameter::ValuationWidth;
    else config_error("sweep.parameter: expected d or w");
  }
  spec.grid = node.contains("grid") ? parse_grid(node["grid"]) : sweep::default_grid(spec.parameter);
  read_bool(node, path, "emit_attractors", spec.emit_attractors);
  read_bool(node, path, "emit_averages", spec.emit_averages);
  return spec;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"market", "mechanism", "demand", "b0", "n_skip", "n_iter", "seed",
                           "long_n", "record_all", "sweep"});
  RunConfig run;
  engine::SimConfig& sim = run.sim;
  if (doc.contains("market")) sim.market = parse_market(doc["market"]);
  if (doc.contains("mechanism")) sim.mechanism = parse_mechanism(doc["mechanism"]);
  if (doc.contains("demand")) sim.demand = parse_demand(doc["demand"]);
  read_number(doc, "", "b0", sim.b0);
  read_count(doc, "", "n_skip", sim.n_skip);
  read_count(doc, "", "n_iter", sim.n_iter);
  read_count(doc, "", "seed", sim.seed);
  read_count(doc, "", "long_n", run.long_n);
  read_bool(doc, "", "record_all", sim.record_all);
  if (doc.contains("sweep")) run.sweep = parse_sweep(doc["sweep"]);
  validate(run);
  return run;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

sweep::SweepSpec sweep_spec(const RunConfig& run) {
  sweep::SweepSpec spec = run.sweep.value_or(sweep::SweepSpec{});
  if (!run.sweep) spec.grid = sweep::default_grid(spec.parameter);
  spec.base_config = run.sim;
  spec.long_n = run.long_n;
  return spec;
}

void validate(const RunConfig& run) {
  // Rethrows a domain error as a config error whose text starts with the field path.
  auto guarded = [](auto&& check, auto&& describe) {
    try {
      check();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      config_error(describe(std::string(e.what())));
    }
  };
  const auto as_is = [](const std::string& message) { return message; };
  guarded([&] { feemarket::validate(run.sim.market.valuation); },
          [](const std::string& message) { return "market." + message; });
  guarded([&] { feemarket::validate(run.sim.market); }, as_is);
  guarded([&] { feemarket::validate(run.sim.mechanism); },
          [](const std::string& message) {
            return "mechanism." + message.substr(0, message.find(' ')) + ": " + message;
          });
  guarded([&] { engine::validate(run.sim); }, as_is);
  if (run.long_n < run.sim.n_skip + 1) config_error("long_n: long_n must exceed n_skip");
  if (run.sweep) {
    guarded([&] { sweep::validate(sweep_spec(run)); },
            [](const std::string& message) { return "sweep: " + message; });
  }
}

}  // namespace feemarket::config
