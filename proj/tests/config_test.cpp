#include <gtest/gtest.h>

#include "feemarket/config.hpp"

namespace fm = feemarket;
namespace cfg = feemarket::config;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    cfg::parse_run_config(doc);
  } catch (const fm::Error& e) {
    EXPECT_EQ(e.kind(), fm::ErrorKind::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << doc.dump();
  return {};
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto run = cfg::parse_run_config(json::object());
  EXPECT_EQ(run.sim.mechanism.rule, fm::Rule::Eip1559);
  EXPECT_DOUBLE_EQ(run.sim.mechanism.d, 0.125);
  EXPECT_DOUBLE_EQ(run.sim.b0, 170.0);
  EXPECT_EQ(run.sim.n_skip, 200u);
  EXPECT_EQ(run.sim.n_iter, 100u);
  EXPECT_EQ(run.long_n, 100000u);
  EXPECT_FALSE(run.sweep.has_value());
  EXPECT_EQ(cfg::sweep_spec(run).grid.size(), 100u);
}

TEST(Config, FullDocument) {
  const auto run = cfg::parse_run_config(json::parse(R"({
    "market": {"target": 10, "k": 3, "lambda": 2.5,
               "valuation": {"kind": "gamma", "m": 220, "w": 10, "a": 1.5}},
    "mechanism": {"rule": "egpcure", "d": 0.2, "gamma": 0.3, "intensity": 0.25,
                  "fee_floor": 0},
    "demand": {"mode": "stochastic", "arrivals": "deterministic"},
    "b0": 100, "n_skip": 10, "n_iter": 20, "seed": 5, "long_n": 1000, "record_all": true,
    "sweep": {"parameter": "w", "grid": {"start": 1, "stop": 3, "count": 5},
              "emit_attractors": false}
  })"));
  EXPECT_EQ(run.sim.market.k, 3);
  EXPECT_EQ(run.sim.market.valuation.kind, fm::ValuationKind::ShiftedGamma);
  EXPECT_DOUBLE_EQ(run.sim.market.valuation.a, 1.5);
  EXPECT_EQ(run.sim.mechanism.rule, fm::Rule::EgpCure);
  EXPECT_DOUBLE_EQ(run.sim.mechanism.intensity, 0.25);
  EXPECT_DOUBLE_EQ(run.sim.mechanism.fee_floor, 0.0);
  EXPECT_EQ(run.sim.demand.mode, fm::DemandMode::Stochastic);
  EXPECT_EQ(run.sim.demand.arrivals, fm::ArrivalKind::Deterministic);
  EXPECT_EQ(run.sim.seed, 5u);
  EXPECT_TRUE(run.sim.record_all);
  ASSERT_TRUE(run.sweep.has_value());
  EXPECT_EQ(run.sweep->parameter, fm::sweep::SweepParameter::ValuationWidth);
  EXPECT_EQ(run.sweep->grid, (std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0}));
  EXPECT_FALSE(run.sweep->emit_attractors);
  EXPECT_TRUE(run.sweep->emit_averages);
  const auto spec = cfg::sweep_spec(run);
  EXPECT_EQ(spec.long_n, 1000u);
  EXPECT_EQ(spec.base_config.b0, 100.0);
}

TEST(Config, GridAsList) {
  const auto run = cfg::parse_run_config(json::parse(R"({"sweep": {"grid": [0.1, 0.2]}})"));
  EXPECT_EQ(run.sweep->grid, (std::vector<double>{0.1, 0.2}));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(error_of(json::parse(R"({"mechanism": {"d": 1.5}})")),
            "mechanism.d: d must lie in (0,1)");
  EXPECT_EQ(error_of(json::parse(R"({"mechanism": {"dd": 0.1}})")), "mechanism.dd: unknown key");
  EXPECT_EQ(error_of(json::parse(R"({"extra": 1})")), "extra: unknown key");
  EXPECT_EQ(error_of(json::parse(R"({"market": {"valuation": {"kind": "pareto"}}})")),
            "market.valuation.kind: expected uniform, normal, gamma or exponential");
  EXPECT_EQ(error_of(json::parse(R"({"market": {"valuation": {"w": -2}}})")),
            "market.valuation.w must be positive");
  EXPECT_EQ(error_of(json::parse(R"({"market": {"lambda": 1}})")), "market.lambda must exceed 1");
  EXPECT_EQ(error_of(json::parse(R"({"market": {"k": 1.5}})")),
            "market.k: expected a non-negative integer");
  EXPECT_EQ(error_of(json::parse(R"({"b0": "high"})")), "b0: expected a number");
  EXPECT_EQ(error_of(json::parse(R"({"n_iter": -3})")), "n_iter: expected a non-negative integer");
  EXPECT_EQ(error_of(json::parse(R"({"record_all": 1})")), "record_all: expected true or false");
  EXPECT_EQ(error_of(json::parse(R"({"mechanism": {"rule": "eip"}})")),
            "mechanism.rule: expected eip1559, exp1559, amm, wel, twel or egpcure");
  EXPECT_EQ(error_of(json::parse(R"({"demand": {"mode": "random"}})")),
            "demand.mode: expected mean_field or stochastic");
  EXPECT_EQ(error_of(json::parse(R"({"sweep": {"grid": [0.7]}})")),
            "sweep: sweep grid values for d must lie in (0,0.5]");
  EXPECT_EQ(error_of(json::parse(R"({"sweep": {"grid": {"start": 0.1}}})")),
            "sweep.grid: range needs start, stop and count");
  EXPECT_EQ(error_of(json::parse(R"({"long_n": 100})")), "long_n: long_n must exceed n_skip");
  EXPECT_EQ(error_of(json::parse("[1, 2]")), "<root>: expected an object");
  EXPECT_EQ(error_of(json::parse(R"({"mechanism": {"rule": "amm", "q": 0}})")),
            "mechanism.q: q must be positive");
}

TEST(Config, AmmDoesNotRequireD) {
  EXPECT_NO_THROW(cfg::parse_run_config(json::parse(R"({"mechanism": {"rule": "amm", "d": 3}})")));
}

TEST(Config, MissingFile) {
  try {
    cfg::load_run_config("/nonexistent/config.json");
    FAIL();
  } catch (const fm::Error& e) {
    EXPECT_EQ(e.kind(), fm::ErrorKind::ConfigError);
  }
}
