#include "feemarket/core.hpp"

#include <algorithm>
#include <cmath>

#include "feemarket/demand.hpp"
#include "feemarket/mechanisms.hpp"

namespace feemarket {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorKind::MissingValuations: return "MissingValuations";
    case ErrorKind::NoClearingPrice: return "NoClearingPrice";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::UnsupportedRule: return "UnsupportedRule";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantError: return "InvariantError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string_view to_string(ValuationKind kind) {
  switch (kind) {
    case ValuationKind::Uniform: return "uniform";
    case ValuationKind::Normal: return "normal";
    case ValuationKind::ShiftedGamma: return "gamma";
    case ValuationKind::ShiftedExponential: return "exponential";
  }
  return "unknown";
}

std::optional<ValuationKind> parse_valuation_kind(std::string_view name) {
  for (auto kind : {ValuationKind::Uniform, ValuationKind::Normal,
                    ValuationKind::ShiftedGamma, ValuationKind::ShiftedExponential}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::Eip1559: return "eip1559";
    case Rule::Exp1559: return "exp1559";
    case Rule::Amm: return "amm";
    case Rule::Wel: return "wel";
    case Rule::TWel: return "twel";
    case Rule::EgpCure: return "egpcure";
  }
  return "unknown";
}

std::optional<Rule> parse_rule(std::string_view name) {
  for (auto rule : {Rule::Eip1559, Rule::Exp1559, Rule::Amm, Rule::Wel, Rule::TWel,
                    Rule::EgpCure}) {
    if (name == to_string(rule)) return rule;
  }
  return std::nullopt;
}

double ValuationDist::stddev() const noexcept {
  switch (kind) {
    case ValuationKind::Uniform: return w / std::sqrt(12.0);
    case ValuationKind::Normal: return w / 4.0;
    case ValuationKind::ShiftedGamma:
    case ValuationKind::ShiftedExponential: return w * std::sqrt(shape());
  }
  return 0.0;
}

double ValuationDist::lower_support() const noexcept {
  switch (kind) {
    case ValuationKind::Uniform: return m - 0.5 * w;
    case ValuationKind::Normal: return -std::numeric_limits<double>::infinity();
    case ValuationKind::ShiftedGamma:
    case ValuationKind::ShiftedExponential: return m - shape() * w;
  }
  return 0.0;
}

double ValuationDist::upper_support() const noexcept {
  if (kind == ValuationKind::Uniform) return m + 0.5 * w;
  return std::numeric_limits<double>::infinity();
}

namespace {

[[noreturn]] void domain_error(const std::string& message) {
  throw Error(ErrorKind::DomainError, message);
}

}  // namespace

void validate(const ValuationDist& dist) {
  if (!std::isfinite(dist.m)) domain_error("valuation.m must be finite");
  if (!(dist.w > 0.0) || !std::isfinite(dist.w)) domain_error("valuation.w must be positive");
  if (dist.kind == ValuationKind::ShiftedGamma && !(dist.a > 0.0)) {
    domain_error("valuation.a must be positive");
  }
}

void validate(const MarketParams& market) {
  if (!(market.target > 0.0) || !std::isfinite(market.target)) {
    domain_error("market.target must be positive");
  }
  if (market.k < 1) domain_error("market.k must be at least 1");
  if (!(market.lambda > 1.0) || !std::isfinite(market.lambda)) {
    domain_error("market.lambda must exceed 1");
  }
  validate(market.valuation);
}

void validate(const MechanismSpec& spec) {
  if (spec.uses_quotient_d() && !(spec.d > 0.0 && spec.d < 1.0)) {
    domain_error("d must lie in (0,1)");
  }
  switch (spec.rule) {
    case Rule::Amm:
      if (!(spec.q > 0.0)) domain_error("q must be positive");
      break;
    case Rule::TWel:
      if (!(spec.delta > 0.0)) domain_error("delta must be positive");
      [[fallthrough]];
    case Rule::Wel:
      if (!(spec.alpha_wel > 0.0 && spec.alpha_wel <= 1.0)) {
        domain_error("alpha_wel must lie in (0,1]");
      }
      break;
    case Rule::EgpCure:
      if (!(spec.gamma > 0.0)) domain_error("gamma must be positive");
      if (!(spec.intensity >= 0.0)) domain_error("intensity must be non-negative");
      break;
    case Rule::Eip1559:
    case Rule::Exp1559:
      break;
  }
  if (!(spec.fee_floor >= 0.0) || !std::isfinite(spec.fee_floor)) {
    domain_error("fee_floor must be non-negative");
  }
}

FeeState step(const FeeState& state, const BlockObservation& block,
              const MechanismSpec& spec, const MarketParams& market) {
  namespace mech = mechanisms;
  const double g = block.block_size;
  const double limit = market.limit();
  const double target = market.target;
  if (!(g >= 0.0 && g <= limit * (1.0 + 1e-12))) {
    throw Error(ErrorKind::InvalidBlockSize,
                "block size " + std::to_string(g) + " outside [0, " + std::to_string(limit) + "]");
  }

  FeeState next{state.base_fee, state.height + 1, state.excess_gas};
  const double b = state.base_fee;
  const double floor = spec.fee_floor;

  switch (spec.rule) {
    case Rule::Eip1559:
      next.base_fee = mech::step_eip1559(b, g, spec.d, target, floor);
      break;
    case Rule::Exp1559:
      next.base_fee = mech::step_exp1559(b, g, spec.d, target, floor);
      break;
    case Rule::Amm: {
      const FeeState amm = mech::step_amm(state, g, spec.q, target);
      next.excess_gas = amm.excess_gas;
      next.base_fee = std::max(amm.base_fee, floor);
      break;
    }
    case Rule::Wel:
    case Rule::TWel: {
      if (std::holds_alternative<std::monostate>(block.valuations)) {
        throw Error(ErrorKind::MissingValuations,
                    std::string(to_string(spec.rule)) + " requires included valuations");
      }
      const bool truncated = spec.rule == Rule::TWel;
      if (const auto* list = std::get_if<std::vector<double>>(&block.valuations)) {
        next.base_fee = truncated
                            ? mech::step_twel(b, *list, g, spec.alpha_wel, spec.delta, limit, floor)
                            : mech::step_wel(b, *list, spec.alpha_wel, limit, floor);
      } else {
        const auto& totals = std::get<ValuationTotals>(block.valuations);
        next.base_fee = truncated ? mech::step_twel_total(b, totals.truncated_sum, g,
                                                          spec.alpha_wel, spec.delta, limit, floor)
                                  : mech::step_wel_total(b, totals.sum, spec.alpha_wel, limit, floor);
      }
      break;
    }
    case Rule::EgpCure:
      next.base_fee = mech::step_egpcure(b, g, block.min_effective_price, spec.d,
                                         spec.intensity, spec.gamma, target, floor);
      break;
  }
  return next;
}

namespace {

constexpr double kRelTol = 1e-12;

bool direction_ok(double fee, double next, double g, double target) {
  if (g >= target && next < fee * (1.0 - kRelTol)) return false;
  if (g <= target && next > fee * (1.0 + kRelTol)) return false;
  return true;
}

/// Largest valuation used as the worst-case minimum effective price.
double valuation_ceiling(const ValuationDist& dist) {
  const double sup = dist.upper_support();
  if (std::isfinite(sup)) return sup;
  return inverse_survival(dist, 1e-12, dist.m, integration_cutoff(dist));
}

}  // namespace

PropernessReport check_properness(const MechanismSpec& spec, const MarketParams& market,
                                  const std::vector<double>& probe_fees) {
  validate(spec);
  validate(market);

  PropernessReport report;
  report.rule = spec.rule;
  report.a1_applicable = spec.rule != Rule::Wel && spec.rule != Rule::TWel;

  const bool egp = spec.rule == Rule::EgpCure;
  const double ceiling = egp ? valuation_ceiling(market.valuation) : 0.0;
  const double egp_alpha = std::max(1.0 + spec.d, 1.0 / (1.0 - spec.d));
  const double egp_beta_bound = spec.intensity * ceiling;
  double egp_beta = 0.0;

  auto record = [&](ProbeResult probe) {
    probe.non_divergent = direction_ok(probe.base_fee, probe.next_fee, probe.block_size,
                                       market.target);
    const double ratio = probe.next_fee / probe.base_fee;
    report.alpha_up = std::max(report.alpha_up, ratio);
    report.alpha_down = std::max(report.alpha_down, probe.next_fee > 0.0
                                                        ? 1.0 / ratio
                                                        : std::numeric_limits<double>::infinity());
    if (report.a1_applicable && !probe.non_divergent) {
      report.a1_holds = false;
      report.a1_violations.push_back(probe);
    }
    if (egp) {
      egp_beta = std::max({egp_beta, probe.next_fee - egp_alpha * probe.base_fee,
                           probe.base_fee / egp_alpha - probe.next_fee});
    }
    report.probes.push_back(probe);
  };

  for (double fee : probe_fees) {
    if (!(fee > 0.0) || !std::isfinite(fee)) continue;
    FeeState state{fee, 0, 0.0};
    if (spec.rule == Rule::Amm) {
      state.excess_gas = mechanisms::amm_excess_gas_for_fee(fee, spec.q);
      state.base_fee = spec.q * std::exp(spec.q * state.excess_gas);
    }
    const double b = state.base_fee;
    const double g = mean_field_block_size(b, market);

    BlockObservation block;
    block.block_size = g;
    block.min_effective_price = b;
    if (spec.rule == Rule::Wel || spec.rule == Rule::TWel) {
      block.valuations = mean_field_valuation_totals(b, market, (1.0 + spec.delta) * b);
    }
    record(ProbeResult{b, g, b, step(state, block, spec, market).base_fee, true});

    if (egp && ceiling > b) {
      block.min_effective_price = ceiling;
      record(ProbeResult{b, g, ceiling, step(state, block, spec, market).base_fee, true});
    }
  }

  report.a2.alpha = std::max(report.alpha_up, report.alpha_down);
  report.a2.beta = 0.0;
  report.a2.holds = std::isfinite(report.a2.alpha);
  if (egp) {
    report.a2_prime = BoundedDifferences{
        egp_alpha, egp_beta, egp_beta <= egp_beta_bound * (1.0 + kRelTol) + kRelTol};
  }
  return report;
}

std::vector<double> default_probe_fees(const MechanismSpec& spec, const MarketParams& market,
                                       std::size_t count, double multiple) {
  const double b_star = market_clearing_price(market, spec.fee_floor);
  const double lo = std::max(spec.fee_floor, kDefaultFeeFloor) * 10.0;
  const double hi = multiple * b_star;
  constexpr std::size_t kBandProbes = 60;
  std::vector<double> fees;
  if (count == 0) return fees;
  fees.reserve(count + kBandProbes + 2);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    fees.push_back(std::exp(log_lo + t * (log_hi - log_lo)));
  }
  fees.push_back(b_star);
  // Dense band around b*, where the update direction changes.
  for (std::size_t i = 0; i <= kBandProbes; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kBandProbes);
    fees.push_back(b_star * (0.5 + 1.5 * t));
  }
  std::sort(fees.begin(), fees.end());
  return fees;
}

}  // namespace feemarket
