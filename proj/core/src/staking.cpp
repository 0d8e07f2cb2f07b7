#include "poel/staking.hpp"

#include "poel/error.hpp"
#include "poel/ledger.hpp"

namespace poel::staking {

Amount liveness_ceiling(const Validator& validator, const ProtocolParams& params) {
  const Amount headroom = validator.direct_stake - validator.min_stake_req;
  if (!headroom.is_positive()) return Amount{};
  return max(headroom.scaled(params.liveness_factor), Amount{});
}

SlashResult slash(std::span<const ReserveState> reserves, std::span<const double> prices, double varpi) {
  if (reserves.size() != prices.size()) throw InvalidArgument("slash: one price per reserve required");
  if (!(varpi >= 0.0 && varpi <= 1.0)) throw InvalidArgument("slash: varpi must lie in [0, 1]");

  SlashResult r;
  r.reserves.assign(reserves.begin(), reserves.end());
  r.value_removed.assign(reserves.size(), Amount{});
  r.tokens_removed.assign(reserves.size(), Amount{});

  std::vector<Amount> loans;
  std::vector<Amount> values;
  for (std::size_t i = 0; i < reserves.size(); ++i) {
    if (!(prices[i] > 0.0)) throw InvalidArgument("slash: reserve prices must be positive");
    loans.push_back(reserves[i].loan);
    values.push_back(Amount::from_double(reserves[i].size.to_double() * prices[i]));
    r.loan_before += reserves[i].loan;
  }
  r.slashed = varpi == 1.0 ? r.loan_before : r.loan_before.scaled(varpi);
  r.loan_after = r.loan_before - r.slashed;
  if (r.slashed.is_zero()) return r;

  const auto loan_cut = allocate(r.slashed, std::span<const Amount>(loans));
  const auto value_cut = allocate(r.slashed, std::span<const Amount>(values));
  for (std::size_t i = 0; i < reserves.size(); ++i) {
    ReserveState& res = r.reserves[i];
    res.loan -= loan_cut[i];
    if (value_cut[i] >= values[i]) {
      r.shortfall += value_cut[i] - values[i];
      r.value_removed[i] = values[i];
      r.tokens_removed[i] = res.size;
      res.size = Amount{};
      continue;
    }
    Amount tokens = Amount::from_double(value_cut[i].to_double() / prices[i]);
    tokens = min(tokens, res.size);
    r.value_removed[i] = value_cut[i];
    r.tokens_removed[i] = tokens;
    res.size -= tokens;
  }
  if (values.empty() || sum(values).is_zero()) r.shortfall = r.slashed;
  return r;
}

UnstakeTicket request_unstake(Amount amount, Epoch epoch, Amount outstanding, const ProtocolParams& params) {
  if (amount.is_negative()) throw InvalidArgument("unstake amount must be >= 0");
  if (amount > outstanding) {
    throw InvalidArgument("over-withdrawal: requested " + amount.to_string() + " but only " +
                          outstanding.to_string() + " is protocol-held");
  }
  return UnstakeTicket{amount, epoch, epoch + params.unstake_epochs};
}

Release release_matured(std::span<const UnstakeTicket> queue, Epoch epoch) {
  Release r;
  for (const auto& t : queue) {
    if (t.release_epoch <= epoch) {
      r.released += t.amount;
    } else {
      r.remaining.push_back(t);
    }
  }
  return r;
}

Amount accrue_staking_rewards(Amount total_loans, double srr, bool accrual_open) {
  if (srr < 0.0) throw InvalidArgument("staking reward rate must be >= 0");
  if (!accrual_open || total_loans.is_negative()) return Amount{};
  return total_loans.scaled(srr);
}

LivenessReport liveness_probability_check(std::size_t ejection_epochs, std::size_t epochs, double limit) {
  if (ejection_epochs > epochs) throw InvalidArgument("more ejection epochs than epochs");
  LivenessReport r;
  r.epochs = epochs;
  r.ejection_epochs = ejection_epochs;
  r.limit = limit;
  r.probability = epochs == 0 ? 0.0 : static_cast<double>(ejection_epochs) / static_cast<double>(epochs);
  r.pass = r.probability <= limit && !(limit == 0.0 && ejection_epochs > 0);
  return r;
}

LivenessReport liveness_probability_check(std::span<const EpochLedger> trace, const ProtocolParams& params) {
  std::size_t ejected = 0;
  const std::size_t epochs = trace.empty() ? 0 : trace.size() - 1;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].risk.ejections > 0) ++ejected;
  }
  return liveness_probability_check(ejected, epochs, params.lambda_ol);
}

}  // namespace poel::staking
