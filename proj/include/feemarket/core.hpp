#pragma once

// Domain types shared by every fee-market module, the properness checker and
// the single-block step dispatcher.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace feemarket {

inline constexpr double kDefaultFeeFloor = 1e-9;

enum class ErrorKind {
  InvalidBlockSize,
  MissingValuations,
  NoClearingPrice,
  DomainError,
  EmptyWindow,
  UnsupportedRule,
  ParseError,
  InvariantError,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class ValuationKind { Uniform, Normal, ShiftedGamma, ShiftedExponential };

std::string_view to_string(ValuationKind kind);
std::optional<ValuationKind> parse_valuation_kind(std::string_view name);

/// Distribution of user valuations, parameterised by location `m`, width `w`
/// and (gamma only) shape `a`.
///
///   Uniform             support [m - w/2, m + w/2]
///   Normal              mean m, standard deviation w/4
///   ShiftedGamma        shift m - a*w, shape a, scale w (mean m, variance a*w^2)
///   ShiftedExponential  ShiftedGamma with a = 1
struct ValuationDist {
  ValuationKind kind = ValuationKind::Normal;
  double m = 210.0;
  double w = 20.0;
  double a = 0.5;

  /// Gamma shape actually used (1 for the exponential family).
  double shape() const noexcept {
    return kind == ValuationKind::ShiftedExponential ? 1.0 : a;
  }
  double mean() const noexcept { return m; }
  double stddev() const noexcept;
  double lower_support() const noexcept;
  /// +infinity for unbounded families.
  double upper_support() const noexcept;
};

struct MarketParams {
  double target = 1.0;  // T, gas units per block
  int k = 2;            // block limit is k*T
  double lambda = 4.0;  // expected arrivals per block, in multiples of T
  ValuationDist valuation{};

  double limit() const noexcept { return k * target; }
};

enum class Rule { Eip1559, Exp1559, Amm, Wel, TWel, EgpCure };

std::string_view to_string(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);

/// Update rule plus its parameters. Only the fields relevant to `rule` are read.
struct MechanismSpec {
  Rule rule = Rule::Eip1559;
  double d = 0.125;        // Eip1559, Exp1559, EgpCure
  double q = 0.1;          // Amm
  double alpha_wel = 0.5;  // Wel, TWel
  double delta = 0.1;      // TWel
  double gamma = 0.2;      // EgpCure trigger threshold
  double intensity = 0.5;  // EgpCure correction weight
  double fee_floor = kDefaultFeeFloor;

  bool uses_quotient_d() const noexcept {
    return rule == Rule::Eip1559 || rule == Rule::Exp1559 || rule == Rule::EgpCure;
  }
};

struct FeeState {
  double base_fee = 1.0;
  std::uint64_t height = 0;
  double excess_gas = 0.0;  // Amm only
};

struct TrajectoryPoint {
  std::uint64_t height = 0;
  double base_fee = 0.0;
  double block_size = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> records;
  /// State after the last recorded block; its base fee closes the telescoping
  /// sums used by the convergence analysis.
  FeeState final_state{};
  MarketParams market{};
  MechanismSpec mechanism{};
  std::uint64_t seed = 0;
};

/// Expected valuation sums for mean-field welfare rules. `truncated_sum` is the
/// sum of min{v, (1 + delta) b} over the included transactions.
struct ValuationTotals {
  double sum = 0.0;
  double truncated_sum = 0.0;
};

using IncludedValuations =
    std::variant<std::monostate, std::vector<double>, ValuationTotals>;

/// What a mechanism observes about the block just produced.
struct BlockObservation {
  double block_size = 0.0;
  IncludedValuations valuations{};  // required by Wel and TWel
  double min_effective_price = 0.0;  // EgpCure; mean-field passes the base fee
};

void validate(const ValuationDist& dist);
void validate(const MarketParams& market);
void validate(const MechanismSpec& spec);

/// Advances one block: dispatches to the concrete rule, clamps to the fee floor.
FeeState step(const FeeState& state, const BlockObservation& block,
              const MechanismSpec& spec, const MarketParams& market);

struct ProbeResult {
  double base_fee = 0.0;
  double block_size = 0.0;
  double min_effective_price = 0.0;
  double next_fee = 0.0;
  bool non_divergent = true;
};

struct BoundedDifferences {
  double alpha = 1.0;
  double beta = 0.0;
  bool holds = true;
};

struct PropernessReport {
  Rule rule = Rule::Eip1559;
  std::vector<ProbeResult> probes;
  /// False for the welfare rules, whose updates do not aim at the target.
  bool a1_applicable = true;
  bool a1_holds = true;
  std::vector<ProbeResult> a1_violations;
  double alpha_up = 1.0;    // max h(b)/b over probes
  double alpha_down = 1.0;  // max b/h(b) over probes
  BoundedDifferences a2{};  // alpha = max(alpha_up, alpha_down), beta = 0
  std::optional<BoundedDifferences> a2_prime;  // EgpCure
};

/// Evaluates non-divergence and bounded relative differences at each probe fee
/// under mean-field demand. EgpCure is additionally probed with the largest
/// valuation as the block's minimum effective price.
PropernessReport check_properness(const MechanismSpec& spec,
                                  const MarketParams& market,
                                  const std::vector<double>& probe_fees);

/// Geometric grid from just above the fee floor to `multiple` times b*, plus
/// b* itself and 61 evenly spaced fees over [b*/2, 2 b*].
std::vector<double> default_probe_fees(const MechanismSpec& spec,
                                       const MarketParams& market,
                                       std::size_t count = 64,
                                       double multiple = 4.0);

}  // namespace feemarket
