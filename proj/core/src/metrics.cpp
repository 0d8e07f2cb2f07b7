#include "poel/metrics.hpp"

#include <cmath>

#include "poel/error.hpp"
#include "poel/risk.hpp"
#include "poel/staking.hpp"

namespace poel::risk {

MetricsRow metrics_row(const EpochLedger& ledger) {
  MetricsRow r;
  r.epoch = ledger.epoch;
  r.transactional_value = ledger.risk.transactional_value;
  r.basket_variance = ledger.risk.basket_variance;
  r.kappa_sum = ledger.risk.kappa_sum;
  r.kappa_ok = ledger.risk.kappa_ok;
  r.basket_return = ledger.risk.basket_return;
  r.has_return = ledger.risk.has_return;
  r.rewards = ledger.plan.budget;
  r.staking_rewards = ledger.staking_rewards;
  r.wash_flags = ledger.risk.wash_flags;
  r.ejections = ledger.risk.ejections;
  return r;
}

std::vector<MetricsRow> metrics_rows(std::span<const EpochLedger> trace) {
  std::vector<MetricsRow> rows;
  rows.reserve(trace.size());
  for (const auto& l : trace) rows.push_back(metrics_row(l));
  return rows;
}

MetricsReport objective_metrics(std::span<const MetricsRow> rows, double w1, double w2, const ProtocolParams& params) {
  if (std::fabs(w1 + w2 - 1.0) > 1e-12) throw InvalidArgument("objective weights must sum to 1");
  if (rows.empty()) throw InvalidArgument("objective metrics need at least one epoch");

  MetricsReport m;
  m.epochs = rows.size();
  m.w1 = w1;
  m.w2 = w2;
  m.alpha = params.alpha;
  m.cvar_limit = params.cvar_limit;

  std::size_t kappa_hits = 0;
  std::vector<double> returns;
  for (const auto& r : rows) {
    m.sum_value += r.transactional_value;
    m.sum_variance += r.basket_variance;
    if (r.kappa_ok) ++kappa_hits;
    if (r.has_return) returns.push_back(r.basket_return);
    m.total_rewards += r.rewards;
    m.total_staking_rewards += r.staking_rewards;
    m.wash_flags += r.wash_flags;
  }
  m.objective = w1 * m.sum_value - w2 * m.sum_variance;
  m.kappa_frequency = static_cast<double>(kappa_hits) / static_cast<double>(rows.size());
  m.kappa_pass = m.kappa_frequency >= params.alpha;

  m.return_samples = returns.size();
  if (returns.size() >= min_samples(kCvarLevel)) {
    m.cvar = expected_shortfall(returns, kCvarLevel);
    m.cvar_pass = *m.cvar <= params.cvar_limit;
  }
  m.budget_ok = m.total_rewards <= m.total_staking_rewards;

  // The first row is the starting snapshot, not an advanced epoch.
  std::size_t ejected = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ejections > 0) ++ejected;
  }
  const auto live = staking::liveness_probability_check(ejected, rows.size() - 1, params.lambda_ol);
  m.ejection_epochs = live.ejection_epochs;
  m.ejection_frequency = live.probability;
  m.liveness_pass = live.pass;
  return m;
}

MetricsReport objective_metrics(std::span<const EpochLedger> trace, double w1, double w2, const ProtocolParams& params) {
  const auto rows = metrics_rows(trace);
  return objective_metrics(rows, w1, w2, params);
}

}  // namespace poel::risk
