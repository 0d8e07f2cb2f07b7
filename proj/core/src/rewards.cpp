#include "poel/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "poel/error.hpp"

namespace poel::rewards {

double capital_efficiency(double available, double deposited) {
  if (!(deposited > 0.0)) throw InvalidArgument("capital efficiency undefined without deposited liquidity");
  if (available < 0.0) throw InvalidArgument("available liquidity must be >= 0");
  return std::max((deposited - available) / deposited, 0.0);
}

double capital_efficiency(Amount available, Amount deposited) {
  if (!deposited.is_positive()) throw InvalidArgument("capital efficiency undefined without deposited liquidity");
  if (available.is_negative()) throw InvalidArgument("available liquidity must be >= 0");
  if (available >= deposited) return 0.0;
  return (deposited - available).to_double() / deposited.to_double();
}

double capital_efficiency_fees(double fees, double rewards) {
  if (!(rewards > 0.0)) throw InvalidArgument("fee efficiency undefined for zero rewards");
  return fees / rewards;
}

double moving_average_at(std::span<const double> raw, std::size_t end, int window) {
  if (window < 1) throw InvalidArgument("moving average window must be >= 1");
  if (end == 0 || end > raw.size()) throw InvalidArgument("moving average end out of range");
  double total = 0.0;
  const auto w = static_cast<std::ptrdiff_t>(window);
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(end) - w; i < static_cast<std::ptrdiff_t>(end); ++i) {
    total += i < 0 ? raw[0] : raw[static_cast<std::size_t>(i)];
  }
  return total / static_cast<double>(window);
}

std::vector<double> moving_average_series(std::span<const double> raw, int window) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (std::size_t end = 1; end <= raw.size(); ++end) out.push_back(moving_average_at(raw, end, window));
  return out;
}

Derivatives discrete_derivatives(std::span<const double> ma) {
  Derivatives d;
  const std::size_t n = ma.size();
  if (n >= 2) d.first = ma[n - 1] - ma[n - 2];
  if (n >= 3) d.second = ma[n - 1] + ma[n - 3] - 2.0 * ma[n - 2];
  return d;
}

EfficiencyTrend moving_average_and_derivatives(std::span<const double> raw, int m, int n) {
  EfficiencyTrend t;
  t.ma_m = moving_average_series(raw, m);
  t.ma_n = moving_average_series(raw, n);
  t.m = discrete_derivatives(t.ma_m);
  t.n = discrete_derivatives(t.ma_n);
  return t;
}

void EfficiencySeries::push(double value, int m, int n) {
  raw.push_back(value);
  ma_m.push_back(moving_average_at(raw, raw.size(), m));
  ma_n.push_back(moving_average_at(raw, raw.size(), n));
}

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

double reward_factor(double eff_ma, double target, const ProtocolParams& params) {
  return std::max(params.zeta, 1.0 - params.theta * ipow(target - eff_ma, params.c));
}

Amount epoch_reward_budget(Amount loan, double srr, double eff_ma, double target, Amount reward_pool,
                           const ProtocolParams& params) {
  if (reward_pool.is_negative()) throw InvalidArgument("reward pool must be >= 0");
  if (srr < 0.0) throw InvalidArgument("staking reward rate must be >= 0");
  const double factor = reward_factor(eff_ma, target, params);
  Amount budget = Amount::from_double(loan.to_double() * srr * factor);
  budget = min(max(budget, Amount{}), reward_pool);
  return max(budget, min(params.r_min, reward_pool));
}

ControllerState controller_update(const ControllerState& state, const Derivatives& m, const Derivatives& n,
                                  const ProtocolParams& params) {
  if (!m.complete() || !n.complete()) return state;
  ControllerState s = state;
  const double dm = *m.first;
  const double dn = *n.first;
  const double sm = *m.second;
  const double sn = *n.second;

  const bool cleared = params.b_lower <= std::max(std::fabs(dm), std::fabs(s.d1m)) &&
                       params.b_lower <= std::max(std::fabs(dn), std::fabs(s.d1n));
  if (cleared) {
    const double trend_m = std::max(dm, s.d1m);
    const double trend_n = std::max(dn, s.d1n);
    const double curve_m = std::max(sm, s.d2m);
    const double curve_n = std::max(sn, s.d2n);
    if (trend_m > 0.0 && trend_n > 0.0) {
      if (curve_m >= 0.0 && curve_n >= 0.0) {
        s.target -= params.upsilon;
      } else {
        s.target -= params.upsilon / std::max(params.q1 * std::fabs(curve_m - curve_n), 1.0);
      }
    } else if (trend_m < 0.0 && trend_n < 0.0) {
      if (curve_m <= 0.0 && curve_n <= 0.0) {
        s.target += params.psi;
      } else {
        s.target += params.psi / std::max(params.q2 * std::fabs(curve_m - curve_n), 1.0);
      }
    }
    s.d1m = s.d1n = s.d2m = s.d2n = 0.0;
  } else {
    s.d1m += dm;
    s.d1n += dn;
    s.d2m += sm;
    s.d2n += sn;
  }
  s.target = std::clamp(s.target, 0.0, 1.0);
  return s;
}

double pool_weight(double eff, double eff_max, double eff_min, const ProtocolParams& params) {
  if (eff_max < eff_min) throw InvalidArgument("pool_weight: eff_max < eff_min");
  const double lo = params.w_floor;
  const double hi = params.w_ceiling();
  if (eff_max - eff_min < 1e-12) return hi;
  if (eff < eff_min - 1e-12 || eff > eff_max + 1e-12) {
    throw InvalidArgument("pool_weight: efficiency outside [eff_min, eff_max]");
  }
  const double ratio = std::clamp((eff_max - eff) / (eff_max - eff_min), 0.0, 1.0);
  return lo + (hi - lo) * (1.0 - std::pow(ratio, params.kappa_w));
}

RewardPlan allocate_rewards(std::span<const std::string> pools, std::span<const Amount> loans,
                            std::span<const double> weights, Amount budget) {
  if (pools.size() != loans.size() || loans.size() != weights.size()) {
    throw InvalidArgument("allocate_rewards: dimension mismatch");
  }
  if (budget.is_negative()) throw InvalidArgument("allocate_rewards: negative budget");
  std::vector<Amount> scaled(loans.size());
  bool any = false;
  for (std::size_t j = 0; j < loans.size(); ++j) {
    if (loans[j].is_negative()) throw InvalidArgument("allocate_rewards: negative loan");
    if (!(weights[j] > 0.0)) throw InvalidArgument("allocate_rewards: weights must be positive");
    scaled[j] = loans[j].scaled(weights[j]);
    any = any || scaled[j].is_positive();
  }
  RewardPlan plan;
  if (!any) return plan;

  plan.budget = budget;
  plan.pools.assign(pools.begin(), pools.end());
  plan.loans.assign(loans.begin(), loans.end());
  plan.weights.assign(weights.begin(), weights.end());
  plan.pro_rata = allocate(budget, loans);
  plan.distributable = allocate(budget, std::span<const Amount>(scaled));
  plan.interest_rate.resize(loans.size());
  plan.interest_payable.resize(loans.size());
  for (std::size_t j = 0; j < loans.size(); ++j) {
    const Amount rj = plan.pro_rata[j];
    plan.interest_rate[j] = rj.is_positive() ? 1.0 - plan.distributable[j].to_double() / rj.to_double() : 0.0;
    plan.interest_payable[j] = rj - plan.distributable[j];
  }
  return plan;
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_tenure_args(double i_min, double i_max, double shape) {
  if (i_max < i_min) throw InvalidArgument("tenure incentive: i_max < i_min");
  if (!(shape > 0.0)) throw InvalidArgument("tenure incentive: shape must be > 0");
}

}  // namespace

double tenure_incentive(double elapsed, double i_min, double i_max, double k, double mid, double shape) {
  check_tenure_args(i_min, i_max, shape);
  const double x = -k * (elapsed - mid);
  return i_min + (i_max - i_min) * std::exp(-shape * softplus(x));
}

double tenure_incentive_slope(double elapsed, double i_min, double i_max, double k, double mid, double shape) {
  check_tenure_args(i_min, i_max, shape);
  const double x = -k * (elapsed - mid);
  return (i_max - i_min) * shape * k * std::exp(x - (shape + 1.0) * softplus(x));
}

Amount max_lock_reward(Amount staking_rewards_distributed, Amount interest_charged) {
  return max(staking_rewards_distributed - interest_charged, Amount{});
}

double present_value(const std::function<double(double)>& incentive, const std::function<double(double)>& rate,
                     double horizon) {
  if (horizon < 0.0) throw InvalidArgument("present_value: negative horizon");
  if (horizon == 0.0) return 0.0;
  constexpr int kPanels = 256;
  const double h = horizon / kPanels;
  double discount_exp = 0.0;
  double prev_rate = rate(0.0);
  double prev_f = incentive(0.0);
  double pv = 0.0;
  for (int i = 1; i <= kPanels; ++i) {
    const double t = h * i;
    const double r = rate(t);
    discount_exp += 0.5 * h * (prev_rate + r);
    const double f = incentive(t) * std::exp(-discount_exp);
    pv += 0.5 * h * (prev_f + f);
    prev_rate = r;
    prev_f = f;
  }
  return pv;
}

FeasibilityReport dra_feasibility(std::span<const Amount> rewards, std::span<const Amount> staking_rewards,
                                  std::span<const Amount> reward_pool, const ProtocolParams& params) {
  if (rewards.size() != staking_rewards.size() || rewards.size() != reward_pool.size()) {
    throw InvalidArgument("dra_feasibility: series lengths differ");
  }
  FeasibilityReport rep;
  auto fail = [&rep](std::size_t e, std::string what) {
    if (!rep.first_failure) rep.first_failure = e;
    rep.violations.push_back("epoch index " + std::to_string(e) + ": " + std::move(what));
  };
  Amount sr_to_date;
  Amount r_before;
  for (std::size_t e = 0; e < rewards.size(); ++e) {
    sr_to_date += staking_rewards[e];
    const Amount expected_rp = sr_to_date - r_before;
    if (!approx_equal(expected_rp, reward_pool[e])) {
      rep.recursion_ok = false;
      fail(e, "reward pool " + reward_pool[e].to_string() + " != recursion " + expected_rp.to_string());
    }
    const Amount lower = min(params.r_min, max(reward_pool[e], Amount{}));
    if (rewards[e] > reward_pool[e] + kAmountTolerance) {
      rep.bounds_ok = false;
      fail(e, "reward " + rewards[e].to_string() + " exceeds pool " + reward_pool[e].to_string());
    } else if (rewards[e] + kAmountTolerance < lower || rewards[e].is_negative()) {
      rep.bounds_ok = false;
      fail(e, "reward " + rewards[e].to_string() + " below minimum " + lower.to_string());
    }
    r_before += rewards[e];
  }
  rep.total_rewards = r_before;
  rep.total_staking_rewards = sr_to_date;
  rep.balanced = approx_equal(rep.total_rewards, rep.total_staking_rewards);
  rep.within_budget = rep.total_rewards <= rep.total_staking_rewards + kAmountTolerance;
  if (!rep.balanced) rep.violations.push_back("lifetime rewards differ from lifetime staking rewards");
  rep.pass = rep.bounds_ok && rep.recursion_ok && rep.balanced;
  return rep;
}

}  // namespace poel::rewards
