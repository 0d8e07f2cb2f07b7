#pragma once

#include <optional>
#include <span>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/ledger.hpp"
#include "poel/params.hpp"

namespace poel::risk {

/// Per-epoch quantities the objective and constraint report is built from.
struct MetricsRow {
  Epoch epoch = 0;
  double transactional_value = 0.0;
  double basket_variance = 0.0;
  double kappa_sum = 0.0;
  bool kappa_ok = true;
  double basket_return = 0.0;
  bool has_return = false;
  Amount rewards;          // R distributed this epoch
  Amount staking_rewards;  // SR accrued this epoch
  int wash_flags = 0;
  int ejections = 0;
};

MetricsRow metrics_row(const EpochLedger& ledger);
std::vector<MetricsRow> metrics_rows(std::span<const EpochLedger> trace);

struct MetricsReport {
  std::size_t epochs = 0;
  double w1 = 0.5;
  double w2 = 0.5;
  double sum_value = 0.0;
  double sum_variance = 0.0;
  double objective = 0.0;  // w1 * sum V - w2 * sum variance

  double kappa_frequency = 1.0;  // share of epochs with the aggregate risk bound holding
  double alpha = 0.0;
  bool kappa_pass = true;

  std::size_t return_samples = 0;
  std::optional<double> cvar;  // 0.99 tail, needs 100 basket returns
  double cvar_limit = 0.0;
  bool cvar_pass = true;

  Amount total_rewards;
  Amount total_staking_rewards;
  bool budget_ok = true;  // sum R <= sum SR

  long wash_flags = 0;
  std::size_t ejection_epochs = 0;
  double ejection_frequency = 0.0;
  bool liveness_pass = true;
};

inline constexpr double kCvarLevel = 0.99;

/// Realised objective and constraint frequencies over a trace. Throws
/// InvalidArgument unless w1 + w2 == 1 (within 1e-12) and rows are nonempty.
MetricsReport objective_metrics(std::span<const MetricsRow> rows, double w1, double w2, const ProtocolParams& params);
MetricsReport objective_metrics(std::span<const EpochLedger> trace, double w1, double w2, const ProtocolParams& params);

}  // namespace poel::risk
