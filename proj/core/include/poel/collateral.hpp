#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/params.hpp"
#include "poel/types.hpp"

namespace poel::collateral {

struct CollateralQuote {
  std::string asset;
  double rho = 1.0;         // effective rate, multiplier included
  double delta_rho = 0.0;   // deviation surcharge
  double multiplier_applied = 1.0;

  [[nodiscard]] double base_rho() const { return rho / multiplier_applied; }

  friend bool operator==(const CollateralQuote&, const CollateralQuote&) = default;
};

/// Deviation surcharge eta * (exp((chi + b*sign(dev)) * |dev|) - 1),
/// dev = (weight - target) / target. `target` must be positive.
double delta_rho(double eta, double chi, double b, double weight, double target);

/// rho = rho_min + delta_rho. Throws NotAdmissible when target == 0.
CollateralQuote collateral_rate(const std::string& asset, double weight, double target, const ProtocolParams& params);

/// Applies a global multiplier m >= 1 to a quote.
CollateralQuote with_multiplier(CollateralQuote quote, double m);

/// Loan delta S*P/rho - L_prev. The target loan is floored to whole fixed-point
/// units so requoted loans never exceed collateral value / rho.
Amount loan_requote(const ReserveState& reserve, double rho, double price);
Amount supported_loan(Amount size, double price, double rho);

struct CeilingReport {
  Amount ceiling;       // T_e
  double w_nst = 1.0;   // 1 - L / TotalStaked for the supplied loans
  bool satisfied = true;
};

/// T_e = TotalStaked * (1 - w*_NST), and the w_NST implied by `loans`.
/// TotalStaked = 0 gives a zero ceiling.
CeilingReport borrow_ceiling(Amount total_staked, Amount loans, const ProtocolParams& params);

/// Ceiling implied by natively staked NST alone: direct * (1 - w*) / w*,
/// i.e. the T_e of the staked total at which the loans would bind it.
Amount ceiling_from_direct_stake(Amount direct, const ProtocolParams& params);

struct CollateralPosition {
  double size = 0.0;
  double price = 0.0;
  double rho = 1.0;
};

struct MultiplierResult {
  double multiplier = 1.0;    // m, clamped at 1
  double implied_loans = 0.0; // sum S*P/rho before scaling
  double ratio = 0.0;         // implied / ceiling, unclamped
  bool all_curtailed = false; // ceiling is zero while collateral is not
};

/// m = max(1, sum(S*P/rho) / T). Rounded up by ulps if needed so that
/// sum(S*P/(rho*m)) <= T holds in floating point.
MultiplierResult global_multiplier(std::span<const CollateralPosition> positions, double ceiling);

enum class RuleKind { MinLiquidity, MaxVolatility };

/// Pure predicate over price-book history ending at the evaluation epoch.
struct QualificationRule {
  std::string name;
  RuleKind kind = RuleKind::MinLiquidity;
  double threshold = 0.0;
  int lookback = 20;  // epochs
};

struct Qualification {
  bool admissible = true;
  std::vector<std::string> failed;  // rule names, with reasons for missing history
};

std::vector<QualificationRule> default_rules(const ProtocolParams& params);

/// Conjunction of all rules at epoch `at`. MinLiquidity needs positive
/// traded volume of at least `threshold` over the lookback; MaxVolatility
/// caps realized volatility of reference returns.
Qualification qualify_asset(const std::string& asset, const PriceBook& history, Epoch at,
                            std::span<const QualificationRule> rules);

struct StakeRatio {
  double ratio = 0.0;
  bool pass = true;
};

/// V_MA / (V_MA + V_NST) < T. Both zero is a vacuous pass.
StakeRatio stake_ratio_check(double v_ma, double v_nst, const ProtocolParams& params);

}  // namespace poel::collateral
