#include "poel/params.hpp"

#include <cmath>

#include "poel/error.hpp"

namespace poel {

double ProtocolParams::eta_for(const std::string& symbol) const {
  const auto it = eta_by_asset.find(symbol);
  return it == eta_by_asset.end() ? eta : it->second;
}

double ProtocolParams::gamma_for(const std::string& symbol) const {
  const auto it = gamma_by_asset.find(symbol);
  return it == gamma_by_asset.end() ? gamma_default : it->second;
}

std::vector<ParamViolation> validate(const ProtocolParams& p) {
  std::vector<ParamViolation> out;
  auto check = [&out](bool ok, const char* field, const char* message) {
    if (!ok) out.push_back({field, message});
  };
  auto finite = [](double v) { return std::isfinite(v); };

  check(finite(p.rho_min) && p.rho_min >= 1.0, "rho_min", "rho_min must be >= 1");
  check(finite(p.eta) && p.eta >= 0.0, "eta", "eta must be >= 0");
  for (const auto& [sym, v] : p.eta_by_asset) check(finite(v) && v >= 0.0, "eta_by_asset", "per-asset eta must be >= 0");
  check(finite(p.chi) && finite(p.b) && p.chi >= p.b, "chi", "chi must be >= b");
  check(p.w_nst_target > 0.0 && p.w_nst_target < 1.0, "w_nst_target", "w_nst_target must lie in (0,1)");
  check(p.t_ratio > 0.0 && p.t_ratio < 1.0, "t_ratio", "t_ratio must lie in (0,1)");
  check(p.extension_interval >= 1, "extension_interval", "extension_interval must be >= 1");

  check(finite(p.srr) && p.srr >= 0.0, "srr", "srr must be >= 0");
  check(p.accrual_epochs >= 0, "accrual_epochs", "accrual_epochs must be >= 0");
  check(p.zeta > 0.0 && p.zeta <= 1.0, "zeta", "zeta must lie in (0,1]");
  check(finite(p.theta) && p.theta >= 0.0, "theta", "theta must be >= 0");
  check(p.c > 0 && p.c % 2 == 1, "c", "c must be odd (reward deviation exponent)");
  check(!p.r_min.is_negative(), "r_min", "r_min must be >= 0");

  check(p.initial_target_eff >= 0.0 && p.initial_target_eff <= 1.0, "initial_target_eff",
        "initial_target_eff must lie in [0,1]");
  check(p.upsilon > 0.0, "upsilon", "upsilon must be > 0");
  check(p.psi > 0.0, "psi", "psi must be > 0");
  check(p.q1 > 0.0, "q1", "q1 must be > 0");
  check(p.q2 > 0.0, "q2", "q2 must be > 0");
  check(finite(p.b_lower) && p.b_lower >= 0.0, "b_lower", "b_lower must be >= 0");
  check(p.m_win >= 1, "m_win", "m_win must be >= 1");
  check(p.n_win > p.m_win, "n_win", "n_win must be > m_win");

  check(p.w_floor > 0.0, "w_floor", "w_floor must be > 0");
  check(p.g_factor > 0.0, "g_factor", "g_factor must be > 0");
  check(p.kappa_w > 0.0, "kappa_w", "kappa_w must be > 0");

  check(finite(p.k) && p.k > 0.0, "k", "k must be > 0");
  check(finite(p.nu) && p.nu > 0.0, "nu", "nu must be > 0");
  check(finite(p.e_mid), "e_mid", "e_mid must be finite");
  check(p.tenure_min_fraction >= 0.0 && p.tenure_min_fraction <= 1.0, "tenure_min_fraction",
        "tenure_min_fraction must lie in [0,1]");

  check(p.varpi >= 0.0 && p.varpi <= 1.0, "varpi", "varpi must lie in [0,1]");
  check(p.unstake_epochs >= 0, "unstake_epochs", "unstake_epochs must be >= 0");
  check(finite(p.liveness_factor) && p.liveness_factor >= 0.0, "liveness_factor", "liveness_factor must be >= 0");

  check(p.sigma_ceiling > 0.0, "sigma_ceiling", "sigma_ceiling must be > 0");
  check(p.es_limit > 0.0, "es_limit", "es_limit must be > 0");
  check(p.ci > 0.0 && p.ci < 1.0, "ci", "ci must lie in (0,1)");
  check(p.risk_lookback >= 2, "risk_lookback", "risk_lookback must be >= 2");
  check(p.reweight_interval >= 1, "reweight_interval", "reweight_interval must be >= 1");
  check(finite(p.min_liquidity) && p.min_liquidity >= 0.0, "min_liquidity", "min_liquidity must be >= 0");
  check(p.qualification_lookback >= 2, "qualification_lookback", "qualification_lookback must be >= 2");
  check(p.wash_price_tol >= 0.0, "wash_price_tol", "wash_price_tol must be >= 0");
  check(p.impact_coeff >= 0.0, "impact_coeff", "impact_coeff must be >= 0");

  check(p.alpha >= 0.0 && p.alpha <= 1.0, "alpha", "alpha must lie in [0,1]");
  check(p.kappa_limit >= 0.0, "kappa_limit", "kappa_limit must be >= 0");
  check(p.cvar_limit >= 0.0, "cvar_limit", "cvar_limit must be >= 0");
  check(p.lambda_ol >= 0.0 && p.lambda_ol <= 1.0, "lambda_ol", "lambda_ol must lie in [0,1]");

  check(p.gamma_default >= 0.0 && p.gamma_default <= 1.0, "gamma_default", "gamma must lie in [0,1]");
  for (const auto& [sym, v] : p.gamma_by_asset) check(v >= 0.0 && v <= 1.0, "gamma_by_asset", "gamma must lie in [0,1]");
  check(p.round_len >= 1, "round_len", "round_len must be >= 1");
  check(!p.credit_budget_initial.is_negative(), "credit_budget_initial", "credit_budget_initial must be >= 0");
  check(p.credit_budget_decay >= 0.0 && p.credit_budget_decay <= 1.0, "credit_budget_decay",
        "credit_budget_decay must lie in [0,1]");
  return out;
}

void require_valid(const ProtocolParams& params) {
  const auto violations = validate(params);
  if (violations.empty()) return;
  std::string msg = "invalid protocol parameters:";
  for (const auto& v : violations) msg += " " + v.field + ": " + v.message + ";";
  throw InvalidArgument(msg);
}

}  // namespace poel
