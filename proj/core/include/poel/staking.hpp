#pragma once

#include <span>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/params.hpp"
#include "poel/types.hpp"

namespace poel {
struct EpochLedger;
}

namespace poel::staking {

/// Delegation headroom of a validator: max(0, liveness_factor * (direct - min)).
Amount liveness_ceiling(const Validator& validator, const ProtocolParams& params);

struct SlashResult {
  Amount loan_before;                   // sum of loans mapped to the validator
  Amount loan_after;                    // loan_before * (1 - varpi)
  Amount slashed;                       // loan_before * varpi
  std::vector<Amount> value_removed;    // per reserve, NST value
  std::vector<Amount> tokens_removed;   // per reserve, LP tokens
  Amount shortfall;                     // value that reserves could not cover
  std::vector<ReserveState> reserves;   // post-slash reserves
};

/// Slashes the loans backed by `reserves` (all mapped to one validator) by
/// varpi and removes the slashed amount from the reserves pro-rata by marked
/// value, converting each share to tokens at its price. A reserve too small
/// for its share is zeroed and the difference reported as shortfall.
SlashResult slash(std::span<const ReserveState> reserves, std::span<const double> prices, double varpi);

/// Ticket maturing `unstake_epochs` after `epoch`. Throws InvalidArgument
/// for negative amounts or amounts above the outstanding protocol-held NST.
UnstakeTicket request_unstake(Amount amount, Epoch epoch, Amount outstanding, const ProtocolParams& params);

struct Release {
  Amount released;
  std::vector<UnstakeTicket> remaining;
};

/// Splits a queue into matured tickets (release_epoch <= epoch) and the rest.
Release release_matured(std::span<const UnstakeTicket> queue, Epoch epoch);

/// SR_e = srr * L_e while the accrual window is open, else zero.
Amount accrue_staking_rewards(Amount total_loans, double srr, bool accrual_open = true);

struct LivenessReport {
  std::size_t epochs = 0;
  std::size_t ejection_epochs = 0;
  double probability = 0.0;
  double limit = 0.0;
  bool pass = true;
};

LivenessReport liveness_probability_check(std::size_t ejection_epochs, std::size_t epochs, double limit);
/// Counts epochs (genesis excluded) in which at least one validator was ejected.
LivenessReport liveness_probability_check(std::span<const EpochLedger> trace, const ProtocolParams& params);

}  // namespace poel::staking
