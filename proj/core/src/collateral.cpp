#include "poel/collateral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poel/error.hpp"
#include "poel/risk.hpp"

namespace poel::collateral {

double delta_rho(double eta, double chi, double b, double weight, double target) {
  if (!(target > 0.0)) throw NotAdmissible("target weight is zero");
  const double dev = (weight - target) / target;
  const double sign = dev > 0.0 ? 1.0 : (dev < 0.0 ? -1.0 : 0.0);
  return eta * std::expm1((chi + b * sign) * std::fabs(dev));
}

CollateralQuote collateral_rate(const std::string& asset, double weight, double target, const ProtocolParams& params) {
  if (!(target > 0.0)) throw NotAdmissible("asset '" + asset + "' has a zero target weight and cannot be admitted");
  CollateralQuote q;
  q.asset = asset;
  q.delta_rho = delta_rho(params.eta_for(asset), params.chi, params.b, weight, target);
  q.rho = std::max(params.rho_min + q.delta_rho, 1.0);
  return q;
}

CollateralQuote with_multiplier(CollateralQuote quote, double m) {
  if (!(m >= 1.0)) throw InvalidArgument("multiplier must be >= 1");
  quote.rho = quote.base_rho() * m;
  quote.multiplier_applied = m;
  return quote;
}

Amount supported_loan(Amount size, double price, double rho) {
  if (!(rho >= 1.0)) throw InvalidArgument("collateralisation rate must be >= 1");
  if (!(price > 0.0)) throw InvalidArgument("price must be positive");
  return Amount::from_double_floor(size.to_double() * price / rho);
}

Amount loan_requote(const ReserveState& reserve, double rho, double price) {
  return supported_loan(reserve.size, price, rho) - reserve.loan;
}

CeilingReport borrow_ceiling(Amount total_staked, Amount loans, const ProtocolParams& params) {
  if (total_staked.is_negative()) throw InvalidArgument("total staked must be >= 0");
  CeilingReport r;
  if (total_staked.is_zero()) {
    r.ceiling = Amount{};
    r.w_nst = loans.is_positive() ? 0.0 : 1.0;
    r.satisfied = !loans.is_positive();
    return r;
  }
  r.ceiling = Amount::from_double_floor(total_staked.to_double() * (1.0 - params.w_nst_target));
  r.w_nst = 1.0 - loans.to_double() / total_staked.to_double();
  r.satisfied = r.w_nst >= params.w_nst_target - 1e-12;
  return r;
}

Amount ceiling_from_direct_stake(Amount direct, const ProtocolParams& params) {
  if (direct.is_negative()) throw InvalidArgument("direct stake must be >= 0");
  const double w = params.w_nst_target;
  return Amount::from_double_floor(direct.to_double() * (1.0 - w) / w);
}

MultiplierResult global_multiplier(std::span<const CollateralPosition> positions, double ceiling) {
  MultiplierResult r;
  for (const auto& p : positions) {
    if (!(p.rho >= 1.0)) throw InvalidArgument("collateralisation rate must be >= 1");
    r.implied_loans += p.size * p.price / p.rho;
  }
  if (!(ceiling > 0.0)) {
    r.all_curtailed = r.implied_loans > 0.0;
    r.ratio = r.all_curtailed ? std::numeric_limits<double>::infinity() : 0.0;
    return r;
  }
  r.ratio = r.implied_loans / ceiling;
  r.multiplier = std::max(1.0, r.ratio);
  if (r.multiplier > 1.0) {
    auto scaled_total = [&](double m) {
      double t = 0.0;
      for (const auto& p : positions) t += p.size * p.price / (p.rho * m);
      return t;
    };
    while (scaled_total(r.multiplier) > ceiling) r.multiplier = std::nextafter(r.multiplier, HUGE_VAL);
  }
  return r;
}

std::vector<QualificationRule> default_rules(const ProtocolParams& params) {
  return {
      {"min_liquidity", RuleKind::MinLiquidity, params.min_liquidity, params.qualification_lookback},
      {"max_volatility", RuleKind::MaxVolatility, params.sigma_ceiling, params.qualification_lookback},
  };
}

Qualification qualify_asset(const std::string& asset, const PriceBook& history, Epoch at,
                            std::span<const QualificationRule> rules) {
  Qualification q;
  auto fail = [&q](std::string why) {
    q.admissible = false;
    q.failed.push_back(std::move(why));
  };
  for (const auto& rule : rules) {
    switch (rule.kind) {
      case RuleKind::MinLiquidity: {
        const Epoch from = at - rule.lookback + 1;
        if (from < history.first_epoch) {
          fail(rule.name + ": insufficient history");
          break;
        }
        double volume = 0.0;
        for (const Trade& t : history.trades_in_epochs(asset, from, at)) volume += std::fabs(t.volume);
        if (!(volume > 0.0) || volume < rule.threshold) fail(rule.name);
        break;
      }
      case RuleKind::MaxVolatility: {
        try {
          const auto returns = history.reference_returns(asset, at, rule.lookback);
          if (risk::realized_volatility(returns) > rule.threshold) fail(rule.name);
        } catch (const InsufficientData&) {
          fail(rule.name + ": insufficient history");
        }
        break;
      }
    }
  }
  return q;
}

StakeRatio stake_ratio_check(double v_ma, double v_nst, const ProtocolParams& params) {
  if (v_ma < 0.0 || v_nst < 0.0) throw InvalidArgument("stake values must be >= 0");
  StakeRatio s;
  if (v_ma + v_nst == 0.0) return s;
  s.ratio = v_ma / (v_ma + v_nst);
  s.pass = s.ratio < params.t_ratio;
  return s;
}

}  // namespace poel::collateral
