#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/params.hpp"
#include "poel/types.hpp"

namespace poel::credits {

/// Per-address service-fee credits for the current round. Credits can only
/// be consumed or expire; nothing moves them between accounts.
struct CreditAccount {
  Address address;
  Amount cap;
  Amount balance;
  std::map<std::string, Amount> usage;  // per service

  [[nodiscard]] Amount used() const;
  friend bool operator==(const CreditAccount&, const CreditAccount&) = default;
};

/// Closing figures of one finished (or running) round.
struct RoundRecord {
  int round = 0;
  Epoch start_epoch = 0;
  Amount budget;       // B_R
  Amount delta;        // Delta B_R
  Amount requested;    // sum of asset caps before fitting
  Amount issued;       // sum of account caps after fitting
  Amount deficit;
  Amount consumed;     // filled in at rollover
  Amount expired;      // filled in at rollover

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct CreditState {
  int round = 0;  // 0 until the first round opens
  Amount budget;
  Amount issued;
  std::map<std::string, Amount> asset_caps;
  std::map<Address, CreditAccount> accounts;
  std::vector<RoundRecord> history;

  friend bool operator==(const CreditState&, const CreditState&) = default;
};

/// S * P * gamma, gamma in [0, 1].
Amount asset_cap(Amount size, double price, double gamma);

/// sum_q share_q * cap_q with each share in [0, 1].
Amount account_cap(std::span<const double> shares, std::span<const Amount> asset_caps);

/// Per-address caps from per-reserve ownership shares. Throws InvalidArgument
/// when the shares of a reserve sum above 1.
std::map<Address, Amount> account_caps(const std::map<std::string, std::map<Address, double>>& shares,
                                       const std::map<std::string, Amount>& asset_caps);

/// Spends credits on a service. Throws Overdraft (account unchanged) when
/// amount exceeds the balance and InvalidArgument for negative amounts.
CreditAccount consume(const CreditAccount& account, const std::string& service, Amount amount);

struct Rollover {
  Amount replenishment;  // cap - end balance
  Amount expired;        // end balance
  CreditAccount account; // reset to the new cap
};

Rollover round_rollover(const CreditAccount& account, Amount new_cap);

struct Budget {
  Amount budget;   // B_R, clamped at zero
  Amount deficit;  // amount by which the recursion went negative
};

/// B_R = B_{R-1} + Delta B_R - sum of caps issued in R-1.
Budget credit_budget(Amount prev, Amount delta, Amount issued_prev);

/// Delta B_R of the default geometric schedule: initial * decay^(R-1).
Amount budget_increment(int round, const ProtocolParams& params);

struct FittedCaps {
  std::map<std::string, Amount> caps;
  Amount requested;
  Amount issued;
  Amount deficit;  // requested - budget when scaling was needed
};

/// Scales caps proportionally so their sum does not exceed the budget.
FittedCaps fit_caps(const std::map<std::string, Amount>& caps, Amount budget);

}  // namespace poel::credits
