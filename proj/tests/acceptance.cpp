// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "feemarket/analysis.hpp"
#include "feemarket/chaindata.hpp"
#include "feemarket/core.hpp"
#include "feemarket/demand.hpp"
#include "feemarket/engine.hpp"
#include "feemarket/mechanisms.hpp"
#include "feemarket/sweep.hpp"

namespace fm = feemarket;
namespace an = feemarket::analysis;
namespace eng = feemarket::engine;

namespace {

// Pinned tolerances.
constexpr double kBoundClosedFormTol = 1e-4;
constexpr double kChordSlack = 1e-12;
constexpr double kEnvelopeRelSlack = 1e-12;
constexpr double kBandSlack = 1e-3;  // in units of T
constexpr double kRankCorrelationMin = 0.95;
constexpr double kIdentityRelTol = 1e-9;
constexpr double kIdentityAbsFloor = 1e-12;  // for gaps indistinguishable from zero
constexpr double kExpTargetTol = 1e-2;
constexpr double kHalvingLo = 0.4;
constexpr double kHalvingHi = 0.6;
constexpr double kAttractorRelTol = 1e-6;
constexpr double kAverageTol = 0.01;
constexpr double kAmmExcessTol = 0.5;
constexpr double kAmmAverageSlack = 1e-3;
constexpr double kChainExactTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

fm::ValuationDist normal(double m, double w) { return {fm::ValuationKind::Normal, m, w, 0.5}; }

Outcome closed_form_bound() {
  const auto report = an::theorem1_upper_bound(0.125, 1.0);
  const bool pass = std::fabs(report.upper_bound - 1.0627) <= kBoundClosedFormTol &&
                    std::fabs(report.factor - 0.5313) <= kBoundClosedFormTol;
  return {pass, fmt("upper=%.6f factor=%.6f (expected 1.0627, 0.5313 +- %g)", report.upper_bound,
                    report.factor, kBoundClosedFormTol)};
}

Outcome log_chord_bounds() {
  std::mt19937_64 gen(20240601);
  std::size_t violations = 0, checked = 0;
  for (double d : {0.05, 0.125, 0.25, 0.5}) {
    const auto chord = an::lemma2_coeffs(d);
    std::uniform_real_distribution<double> dist(-d, d);
    for (int i = 0; i < 10000; ++i) {
      const double x = dist(gen);
      const double value = std::log1p(x);
      if (value < chord.slope * x + chord.intercept - kChordSlack) ++violations;
      if (value > x + kChordSlack) ++violations;
      ++checked;
    }
  }
  return {violations == 0, fmt("%zu samples, %zu violations", checked, violations)};
}

Outcome bounded_trajectories() {
  std::mt19937_64 gen(1559);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> m(150.0, 250.0), w(1.0, 40.0), a(0.3, 3.0),
      lambda(1.5, 8.0), d(0.01, 0.9), log_b0(std::log(1e-3), std::log(1e4));
  std::size_t violations = 0, configs = 0;
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    eng::SimConfig config;
    config.market.valuation = {static_cast<fm::ValuationKind>(kind(gen)), m(gen), w(gen), a(gen)};
    config.market.lambda = lambda(gen);
    config.mechanism.rule = c % 2 ? fm::Rule::Exp1559 : fm::Rule::Eip1559;
    config.mechanism.d = d(gen);
    config.b0 = std::exp(log_b0(gen));
    config.n_skip = 0;
    config.n_iter = 10000;
    const double q = config.mechanism.d;
    const double up = 1.0 + q;
    const double down = config.mechanism.rule == fm::Rule::Eip1559 ? 1.0 / (1.0 - q) : 1.0 + q;
    const double b_star = fm::market_clearing_price(config.market);
    const double lo = std::min(config.b0, b_star / down) * (1.0 - kEnvelopeRelSlack);
    const double hi = std::max(config.b0, up * b_star) * (1.0 + kEnvelopeRelSlack);
    const auto trajectory = eng::run(config);
    for (const auto& rec : trajectory.records) {
      if (rec.base_fee < lo || rec.base_fee > hi) {
        ++violations;
        worst = std::max(worst, std::max(lo / rec.base_fee, rec.base_fee / hi));
      }
    }
    ++configs;
  }
  return {violations == 0,
          fmt("%zu configs x 10000 steps, %zu fees outside the envelope", configs, violations)};
}

std::vector<double> d_grid_50() {
  std::vector<double> grid;
  for (int i = 1; i <= 50; ++i) grid.push_back(0.01 * i);
  return grid;
}

fm::sweep::SweepSpec band_sweep(fm::Rule rule) {
  fm::sweep::SweepSpec spec;
  spec.grid = d_grid_50();
  spec.base_config.market.valuation = normal(210.0, 10.0);
  spec.base_config.market.lambda = 4.0;
  spec.base_config.mechanism.rule = rule;
  spec.long_n = 100000;
  spec.emit_attractors = false;
  return spec;
}

Outcome average_band() {
  const auto data = fm::sweep::run_sweep(band_sweep(fm::Rule::Eip1559), 0);
  std::vector<double> ds, averages;
  std::size_t outside = 0;
  double min_avg = 1e9, max_excess = -1e9;
  for (const auto& point : data.points) {
    const double avg = point.average.avg_block_size;
    const double upper = an::theorem1_upper_bound(point.value).upper_bound;
    if (avg < 1.0 - kBandSlack || avg > upper + kBandSlack) ++outside;
    min_avg = std::min(min_avg, avg);
    max_excess = std::max(max_excess, avg - upper);
    ds.push_back(point.value);
    averages.push_back(avg);
  }
  const double rho = an::rank_correlation(ds, averages);
  return {outside == 0 && rho > kRankCorrelationMin,
          fmt("50 d values: %zu outside band, min avg %.5f, max avg-upper %.5f, rank corr %.4f",
              outside, min_avg, max_excess, rho)};
}

Outcome exp_identity() {
  std::size_t identity_failures = 0, target_failures = 0;
  double worst_rel = 0.0, worst_gap = 0.0;
  for (double d : d_grid_50()) {
    eng::SimConfig config = band_sweep(fm::Rule::Exp1559).base_config;
    config.mechanism.d = d;
    config.n_iter = 100000 - config.n_skip;
    const auto trajectory = eng::run(config);
    const auto gaps = an::convergence_gap(trajectory, config.mechanism);
    for (const auto& gap : gaps) {
      const double diff = std::fabs(std::fabs(gap.measured) - std::fabs(gap.predicted));
      const double scale = std::max(std::fabs(gap.predicted), std::fabs(gap.measured));
      if (diff > kIdentityRelTol * scale + kIdentityAbsFloor) ++identity_failures;
      if (scale > 1e-6) worst_rel = std::max(worst_rel, diff / scale);
    }
    const double final_gap = std::fabs(gaps.back().measured);
    worst_gap = std::max(worst_gap, final_gap);
    if (final_gap >= kExpTargetTol) ++target_failures;
  }
  return {identity_failures == 0 && target_failures == 0,
          fmt("identity failures %zu (worst rel %.2e where |gap| > 1e-6), max |G_N - T| at N=1e5 %.2e",
              identity_failures, worst_rel, worst_gap)};
}

Outcome halving_rate() {
  struct Case {
    const char* name;
    fm::ValuationDist dist;
    double lambda;
  };
  const Case cases[] = {
      {"normal m=210 w=10", normal(210.0, 10.0), 4.0},
      {"uniform [200,230]", {fm::ValuationKind::Uniform, 215.0, 30.0, 0.5}, 2.0},
  };
  bool pass = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    eng::SimConfig config;
    config.market.valuation = c.dist;
    config.market.lambda = c.lambda;
    config.mechanism.rule = fm::Rule::Exp1559;
    config.b0 = 100.0;
    config.n_skip = 0;
    config.n_iter = 100000;
    const auto gaps = an::convergence_gap(eng::run(config), config.mechanism);
    double lo = 1e9, hi = 0.0;
    for (std::size_t n = 1000; 2 * n <= 100000; n *= 2) {
      const double ratio = std::fabs(gaps[2 * n - 1].measured) / std::fabs(gaps[n - 1].measured);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    pass = pass && lo >= kHalvingLo && hi <= kHalvingHi;
    detail << c.name << ": gap(2N)/gap(N) in [" << fmt("%.4f", lo) << ", " << fmt("%.4f", hi)
           << "]; ";
  }
  return {pass, detail.str()};
}

Outcome chaotic_regime() {
  std::size_t cardinality[3];
  const double ds[3] = {0.05, 0.2, 0.45};
  fm::MarketParams market;
  market.lambda = 4.0;
  market.valuation = {fm::ValuationKind::ShiftedGamma, 220.0, 10.0, 1.0};
  const double b_star = fm::market_clearing_price(market);
  for (int i = 0; i < 3; ++i) {
    eng::SimConfig config;
    config.market = market;
    config.mechanism.d = ds[i];
    config.n_skip = 500;
    config.n_iter = 1000;
    std::vector<double> fees;
    for (const auto& rec : eng::run(config).records) fees.push_back(rec.base_fee);
    cardinality[i] = an::attractor_cardinality(fees, kAttractorRelTol * b_star);
  }
  const bool pass = cardinality[0] == 1 && cardinality[1] == 2 && cardinality[2] > 2;
  return {pass, fmt("attractor sizes %zu / %zu / %zu at d = 0.05 / 0.2 / 0.45", cardinality[0],
                    cardinality[1], cardinality[2])};
}

Outcome exponential_average() {
  eng::SimConfig config;
  config.market.valuation = {fm::ValuationKind::ShiftedExponential, 210.0, 5.0, 1.0};
  config.market.lambda = 4.0;
  config.mechanism.d = 0.125;
  config.b0 = 100.0;
  const auto summary = eng::run_average(config, 100000);
  const double rel = summary.avg_block_size / config.market.limit();
  return {std::fabs(rel - 0.53) <= kAverageTol,
          fmt("average relative block size %.5f (expected 0.53 +- %g)", rel, kAverageTol)};
}

Outcome amm_fixed_point() {
  eng::SimConfig config;
  config.market.lambda = 2.0;
  config.market.valuation = {fm::ValuationKind::Uniform, 215.0, 30.0, 0.5};
  config.mechanism.rule = fm::Rule::Amm;
  config.mechanism.q = 0.1;
  config.b0 = 170.0;
  const double b_star = fm::market_clearing_price(config.market);
  const bool sufficient = an::amm_sufficient_condition(config.market, config.mechanism.q);
  const auto summary = eng::run_average(config, 100000);
  const double excess = summary.final_state.excess_gas;
  const double average = summary.avg_block_size;
  const bool pass = sufficient && std::fabs(b_star - 215.0) < 1e-9 &&
                    std::fabs(excess - 76.73) <= kAmmExcessTol &&
                    average <= config.market.target * (1.0 + kAmmAverageSlack);
  return {pass, fmt("b*=%.6f, sufficient condition %s, excess gas %.4f (expected 76.73 +- %g), "
                    "average block %.6f",
                    b_star, sufficient ? "holds" : "fails", excess, kAmmExcessTol, average)};
}

Outcome chain_pipeline() {
  namespace cd = fm::chaindata;
  auto fixture = [](std::size_t n, auto&& used) {
    std::ostringstream csv;
    csv << "number,gas_used,gas_limit\n";
    for (std::size_t i = 0; i < n; ++i) csv << 15000000 + i << ',' << used(i) << ",30000000\n";
    std::istringstream in(csv.str());
    return cd::parse_csv(in);
  };
  struct Case {
    const char* name;
    std::vector<cd::BlockRecord> records;
    double expected;
    bool within;
    bool above;
    bool below;
  };
  std::vector<Case> cases;
  cases.push_back({"constant", fixture(20000, [](std::size_t) { return 15000000; }), 0.5, true,
                   false, false});
  cases.push_back({"alternating", fixture(20000, [](std::size_t i) { return i % 2 ? 30000000 : 0; }),
                   0.5, true, false, false});
  cases.push_back({"noisy 0.515",
                   fixture(20000, [](std::size_t i) { return i % 2 ? 15750000 : 15150000; }), 0.515,
                   true, false, false});
  cases.push_back({"hot 0.54", fixture(10000, [](std::size_t) { return 16200000; }), 0.54, false,
                   true, false});
  cases.push_back({"cold 0.49", fixture(10000, [](std::size_t) { return 14700000; }), 0.49, false,
                   false, true});
  bool pass = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    const auto batches = cd::batch_averages(c.records, 5000);
    bool exact = true;
    for (const auto& b : batches) {
      exact = exact && std::fabs(b.avg_relative_size - c.expected) <= kChainExactTol;
    }
    const auto report = cd::bound_comparison(batches, 0.125);
    const bool flags = report.overall.within_band == c.within &&
                       report.above_band.empty() == !c.above &&
                       report.below_band.empty() == !c.below;
    pass = pass && exact && flags;
    detail << c.name << (exact && flags ? " ok" : " MISMATCH") << "; ";
  }
  return {pass, detail.str()};
}

Outcome properness() {
  fm::MarketParams market;
  market.lambda = 2.0;
  market.valuation = {fm::ValuationKind::Uniform, 215.0, 30.0, 0.5};
  std::ostringstream detail;
  bool pass = true;
  for (fm::Rule rule : {fm::Rule::Eip1559, fm::Rule::Exp1559}) {
    fm::MechanismSpec spec;
    spec.rule = rule;
    const auto report = fm::check_properness(spec, market, fm::default_probe_fees(spec, market));
    pass = pass && report.a1_holds && report.a2.holds;
    detail << fm::to_string(rule) << " direction " << (report.a1_holds ? "ok" : "fail") << " alpha "
           << fmt("%.6f", report.a2.alpha) << "; ";
  }
  // Bounded valuations wide enough that (1 + gamma) b stays below the ceiling
  // for fees just above b*, where blocks are under-full.
  fm::MarketParams wide = market;
  wide.valuation = {fm::ValuationKind::Uniform, 200.0, 200.0, 0.5};
  fm::MechanismSpec egp;
  egp.rule = fm::Rule::EgpCure;
  const auto report = fm::check_properness(egp, wide, fm::default_probe_fees(egp, wide));
  const bool a2_prime = report.a2_prime && report.a2_prime->holds;
  const bool witness = std::any_of(
      report.a1_violations.begin(), report.a1_violations.end(), [&](const fm::ProbeResult& p) {
        return p.block_size < wide.target && p.next_fee > p.base_fee;
      });
  pass = pass && a2_prime && witness;
  detail << "egpcure shifted bound " << (a2_prime ? "ok" : "fail") << " beta "
         << fmt("%.4f", report.a2_prime ? report.a2_prime->beta : -1.0) << ", direction witnesses "
         << report.a1_violations.size();
  return {pass, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {"average-bound closed form", closed_form_bound},
      {"log chord bounds", log_chord_bounds},
      {"bounded fee trajectories", bounded_trajectories},
      {"long-run average band over d", average_band},
      {"exponential rule telescoping identity", exp_identity},
      {"exponential rule 1/N convergence", halving_rate},
      {"chaotic regime attractors", chaotic_regime},
      {"shifted-exponential average 0.53", exponential_average},
      {"AMM fixed point", amm_fixed_point},
      {"chain-data pipeline", chain_pipeline},
      {"properness checker", properness},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failed;
    std::printf("%s [%02d] %s: %s (%.2fs)\n", outcome.pass ? "PASS" : "FAIL", index, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return std::min(failed, 100);
}
