#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poel/decimal.hpp"

namespace poel {

using Epoch = std::int64_t;
using ValidatorId = std::string;
using Address = std::string;

struct AssetId {
  std::string symbol;
  bool is_nst = false;

  friend auto operator<=>(const AssetId&, const AssetId&) = default;
};

/// One fill on an asset's trade tape. Positive volume is a buy.
struct Trade {
  std::int64_t timestep = 0;
  double volume = 0.0;
  double price = 0.0;
};

/// Per-asset market history in the NST numeraire.
///
/// Series index i maps to epoch `first_epoch + i`, so scenarios can carry
/// pre-genesis history for risk lookbacks. `reference` holds prices in an
/// external unit (NST included) for risk estimation; when an asset has no
/// reference series its numeraire prices are used instead.
struct PriceBook {
  Epoch first_epoch = 0;
  int steps_per_epoch = 1;
  std::string nst_symbol;
  std::map<std::string, std::vector<double>> prices;
  std::map<std::string, std::vector<double>> reference;
  std::map<std::string, std::vector<double>> spreads;
  std::map<std::string, std::vector<Trade>> tapes;  // ordered by timestep

  /// Numeraire price; NST is always 1. Empty when the epoch is not covered.
  [[nodiscard]] std::optional<double> price(const std::string& symbol, Epoch epoch) const;
  /// Price or MissingPrice.
  [[nodiscard]] double require_price(const std::string& symbol, Epoch epoch) const;
  [[nodiscard]] std::optional<double> reference_price(const std::string& symbol, Epoch epoch) const;
  [[nodiscard]] std::optional<double> spread(const std::string& symbol, Epoch epoch) const;

  /// Simple returns of the reference series over epochs (to-lookback, to].
  /// Throws InsufficientData when the window is not covered.
  [[nodiscard]] std::vector<double> reference_returns(const std::string& symbol, Epoch to, int lookback) const;

  [[nodiscard]] std::vector<Trade> trades_in_epochs(const std::string& symbol, Epoch from, Epoch to) const;
  [[nodiscard]] Epoch epoch_of(std::int64_t timestep) const;
  [[nodiscard]] Epoch last_epoch() const;
};

/// LP-token collateral pool mapped to one validator.
struct ReserveState {
  std::int64_t id = 0;
  Address owner;
  std::string asset;
  ValidatorId validator;
  Amount size;  // LP tokens S
  Amount loan;  // borrowed NST L
  Epoch lock_start = 0;
  Epoch lock_len = 0;
  Amount rewards_accrued;

  friend bool operator==(const ReserveState&, const ReserveState&) = default;
};

struct Validator {
  ValidatorId id;
  Amount direct_stake;
  Amount min_stake_req;
  bool active = true;

  friend bool operator==(const Validator&, const Validator&) = default;
};

struct UnstakeTicket {
  Amount amount;
  Epoch request_epoch = 0;
  Epoch release_epoch = 0;

  friend bool operator==(const UnstakeTicket&, const UnstakeTicket&) = default;
};

}  // namespace poel
