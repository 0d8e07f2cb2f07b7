#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/params.hpp"
#include "poel/types.hpp"

namespace poel::rewards {

/// Utilised share of deposited liquidity: max((deposited - available) / deposited, 0).
/// Throws InvalidArgument when nothing is deposited.
double capital_efficiency(double available, double deposited);
double capital_efficiency(Amount available, Amount deposited);

/// Fee productivity of distributed rewards, F / R (unclamped). R must be > 0.
double capital_efficiency_fees(double fees, double rewards);

/// Simple moving average of the last `window` values of `raw` ending at
/// index `end` (exclusive). Missing leading samples are filled with raw[0].
double moving_average_at(std::span<const double> raw, std::size_t end, int window);
std::vector<double> moving_average_series(std::span<const double> raw, int window);

struct Derivatives {
  std::optional<double> first;   // E_e - E_{e-1}
  std::optional<double> second;  // E_e + E_{e-2} - 2 E_{e-1}

  [[nodiscard]] bool complete() const { return first.has_value() && second.has_value(); }
};

Derivatives discrete_derivatives(std::span<const double> ma_series);

struct EfficiencyTrend {
  std::vector<double> ma_m;
  std::vector<double> ma_n;
  Derivatives m;
  Derivatives n;
};

EfficiencyTrend moving_average_and_derivatives(std::span<const double> raw, int m, int n);

/// Raw efficiency history with incrementally maintained short/long averages.
struct EfficiencySeries {
  std::vector<double> raw;
  std::vector<double> ma_m;
  std::vector<double> ma_n;

  void push(double value, int m, int n);
  [[nodiscard]] bool empty() const { return raw.empty(); }
  [[nodiscard]] double last_ma_m() const { return ma_m.empty() ? 0.0 : ma_m.back(); }
  [[nodiscard]] double last_ma_n() const { return ma_n.empty() ? 0.0 : ma_n.back(); }
  [[nodiscard]] Derivatives derivatives_m() const { return discrete_derivatives(ma_m); }
  [[nodiscard]] Derivatives derivatives_n() const { return discrete_derivatives(ma_n); }

  friend bool operator==(const EfficiencySeries&, const EfficiencySeries&) = default;
};

/// max(zeta, 1 - theta * (target - eff)^c)
double reward_factor(double eff_ma, double target, const ProtocolParams& params);

/// min(srr * L * reward_factor, RP), then raised to min(r_min, RP).
Amount epoch_reward_budget(Amount loan, double srr, double eff_ma, double target, Amount reward_pool,
                           const ProtocolParams& params);

struct ControllerState {
  double target = 0.5;
  double d1m = 0.0;
  double d1n = 0.0;
  double d2m = 0.0;
  double d2n = 0.0;

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// One step of the target capital efficiency controller.
///
/// When the first-derivative bound test clears in both windows the target
/// moves against the trend (down by upsilon on a rise, up by psi on a fall,
/// damped by q1/q2 when the windows disagree on curvature) and the
/// accumulators reset. Otherwise the current derivatives are accumulated and
/// the target holds. Incomplete derivatives leave the state untouched.
ControllerState controller_update(const ControllerState& state, const Derivatives& m, const Derivatives& n,
                                  const ProtocolParams& params);

/// Reward weight of a pool from its moving-average efficiency; the ceiling
/// weight is w_floor * (1 + g_factor). Equal extremes give the ceiling to all.
double pool_weight(double eff, double eff_max, double eff_min, const ProtocolParams& params);

struct RewardPlan {
  Amount budget;                          // R^i_e
  std::vector<std::string> pools;
  std::vector<Amount> loans;              // L^j
  std::vector<double> weights;            // W^j
  std::vector<Amount> pro_rata;           // R^j = R * L^j / L
  std::vector<Amount> distributable;      // DR^j
  std::vector<double> interest_rate;      // I^j = 1 - DR^j / R^j
  std::vector<Amount> interest_payable;   // IP^j = R^j * I^j

  [[nodiscard]] bool empty() const { return pools.empty(); }
  friend bool operator==(const RewardPlan&, const RewardPlan&) = default;
};

/// DR^j = L^j W^j / sum(L W) * R, exact in fixed point. All-zero loans give
/// an empty plan (the budget stays in the reward pool).
RewardPlan allocate_rewards(std::span<const std::string> pools, std::span<const Amount> loans,
                            std::span<const double> weights, Amount budget);

/// i_min + (i_max - i_min) / (1 + exp(-k (t - mid)))^shape
double tenure_incentive(double elapsed, double i_min, double i_max, double k, double mid, double shape);
/// d/dt of tenure_incentive; positive whenever i_max > i_min.
double tenure_incentive_slope(double elapsed, double i_min, double i_max, double k, double mid, double shape);

/// Staking rewards distributed minus interest charged, floored at zero.
Amount max_lock_reward(Amount staking_rewards_distributed, Amount interest_charged);

/// Integral over [0, horizon] of incentive(t) * exp(-integral_0^t rate(u) du),
/// trapezoidal with 256 panels for both integrals.
double present_value(const std::function<double(double)>& incentive, const std::function<double(double)>& rate,
                     double horizon);

struct FeasibilityReport {
  bool pass = true;
  bool bounds_ok = true;
  bool recursion_ok = true;
  bool balanced = true;      // sum R == sum SR
  bool within_budget = true; // sum R <= sum SR
  std::optional<std::size_t> first_failure;
  Amount total_rewards;
  Amount total_staking_rewards;
  std::vector<std::string> violations;
};

/// Checks min(r_min, RP_e) <= R_e <= RP_e per epoch, the pool recursion
/// RP_e = sum_{o<=e} SR_o - sum_{o<e} R_o, and lifetime balance.
FeasibilityReport dra_feasibility(std::span<const Amount> rewards, std::span<const Amount> staking_rewards,
                                  std::span<const Amount> reward_pool, const ProtocolParams& params);

}  // namespace poel::rewards
