#pragma once

#include <map>
#include <string>
#include <vector>

#include "poel/decimal.hpp"

namespace poel {

/// Every tunable constant of the protocol engine. Defaults describe a
/// moderately conservative program; scenarios override them from config.
struct ProtocolParams {
  // collateral
  double rho_min = 1.25;
  double eta = 0.5;
  std::map<std::string, double> eta_by_asset;
  double chi = 2.0;
  double b = 2.0;
  double w_nst_target = 0.6;
  double t_ratio = 0.45;
  int extension_interval = 1;  // positive loan deltas apply when epoch % interval == 0

  // reward budget
  double srr = 0.002;     // staking reward rate per epoch
  int accrual_epochs = 0;  // epochs that feed the reward pool; 0 = unlimited
  double zeta = 0.2;
  double theta = 2.0;
  int c = 1;
  Amount r_min;

  // target efficiency controller
  double initial_target_eff = 0.5;
  double upsilon = 0.02;
  double psi = 0.02;
  double q1 = 2.0;
  double q2 = 2.0;
  double b_lower = 0.002;
  int m_win = 5;
  int n_win = 20;

  // lending fee weights
  double w_floor = 1.0;
  double g_factor = 1.0;
  double kappa_w = 1.0;

  // tenure sigmoid
  double k = 0.1;
  double nu = 1.0;
  double e_mid = 30.0;
  double tenure_min_fraction = 0.5;

  // staking
  double varpi = 0.05;
  int unstake_epochs = 7;
  double liveness_factor = 1.0;

  // risk
  double sigma_ceiling = 0.08;
  double es_limit = 0.10;
  double ci = 0.95;
  int risk_lookback = 40;
  int reweight_interval = 10;
  double min_liquidity = 0.0;
  int qualification_lookback = 20;
  double wash_price_tol = 1e-3;
  double impact_coeff = 1.0;

  // objective / constraint reporting
  double alpha = 0.9;
  double kappa_limit = 1e18;
  double cvar_limit = 0.1;
  double lambda_ol = 0.05;

  // service fee credits
  double gamma_default = 0.01;
  std::map<std::string, double> gamma_by_asset;
  int round_len = 10;
  Amount credit_budget_initial = Amount::from_int(1000);
  double credit_budget_decay = 0.9;

  [[nodiscard]] double eta_for(const std::string& symbol) const;
  [[nodiscard]] double gamma_for(const std::string& symbol) const;
  [[nodiscard]] double w_ceiling() const { return w_floor * (1.0 + g_factor); }

  friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

struct ParamViolation {
  std::string field;
  std::string message;
};

/// All invariant violations, in field order. Empty means valid.
std::vector<ParamViolation> validate(const ProtocolParams& params);

/// Throws InvalidArgument listing every violation.
void require_valid(const ProtocolParams& params);

}  // namespace poel
