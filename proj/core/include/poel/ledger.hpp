#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poel/collateral.hpp"
#include "poel/credits.hpp"
#include "poel/decimal.hpp"
#include "poel/params.hpp"
#include "poel/rewards.hpp"
#include "poel/types.hpp"

namespace poel {

/// Validator misbehaviour observed during an epoch.
struct FaultEvent {
  ValidatorId validator;
  bool slash_direct = true;  // also slash the validator's own stake
};

/// Everything exogenous the engine reads: prices, pool demand, faults.
struct Market {
  PriceBook book;
  /// NST value of liquidity utilised per pool and epoch, indexed like the
  /// price book series. Missing entries mean no demand.
  std::map<std::string, std::vector<double>> demand;
  std::map<std::string, double> fee_rate;  // fees per unit of utilised value
  std::map<Epoch, std::vector<FaultEvent>> faults;

  [[nodiscard]] double demand_at(const std::string& asset, Epoch epoch) const;
};

/// CDA pool of one collateral asset, valued in NST.
struct PoolState {
  std::string asset;
  Amount tokens;     // LP tokens held in reserves
  Amount deposited;  // tokens * price
  Amount utilised;
  Amount available;
  Amount fees;
  Amount loan;
  double efficiency = 0.0;
  bool has_efficiency = false;

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

/// Per-epoch inputs to the objective and constraint report.
struct RiskSnapshot {
  double transactional_value = 0.0;
  double fees = 0.0;
  double basket_variance = 0.0;  // sigma_p^2 * basket value^2
  double basket_return = 0.0;
  bool has_return = false;
  double kappa_sum = 0.0;        // sum of per-pool ES * pool value
  bool kappa_ok = true;
  int wash_flags = 0;
  int ejections = 0;
  int slashes = 0;

  friend bool operator==(const RiskSnapshot&, const RiskSnapshot&) = default;
};

enum class EventKind {
  Curtailment,
  Extension,
  Slash,
  Ejection,
  WashTrade,
  Undercollateralised,
  Inadmissible,
  InfeasibleTargets,
  CeilingBinding,
  CreditDeficit,
  StakeRatioBreach,
  UnstakeReleased,
};

std::string to_string(EventKind kind);

struct LedgerEvent {
  EventKind kind = EventKind::Curtailment;
  std::string subject;
  std::string detail;

  friend bool operator==(const LedgerEvent&, const LedgerEvent&) = default;
};

/// Complete protocol state after an epoch. Snapshots are plain values;
/// advancing returns a new one and leaves its input untouched.
struct EpochLedger {
  Epoch epoch = 0;
  Epoch genesis_epoch = 0;
  std::string nst;
  std::vector<AssetId> assets;
  std::vector<Validator> validators;
  std::vector<ReserveState> reserves;
  std::vector<PoolState> pools;  // one per collateral asset, in asset order

  std::map<std::string, double> targets;  // w*, NST included
  std::map<std::string, bool> admissible;
  std::map<std::string, collateral::CollateralQuote> quotes;
  double multiplier = 1.0;

  Amount reward_pool;
  Amount staking_rewards;  // SR of this epoch
  Amount cumulative_staking_rewards;
  Amount cumulative_distributed;
  Amount total_direct_stake;
  Amount borrow_ceiling;
  double w_nst = 1.0;
  double stake_ratio = 0.0;
  bool stake_ratio_ok = true;

  Amount protocol_held;  // curtailed NST waiting out the unstaking period
  std::vector<UnstakeTicket> unstake_queue;
  Amount unstaked_total;

  std::map<std::string, rewards::EfficiencySeries> pool_efficiency;
  rewards::EfficiencySeries cda_efficiency;
  rewards::ControllerState controller;
  rewards::RewardPlan plan;
  credits::CreditState credits;

  RiskSnapshot risk;
  std::vector<LedgerEvent> events;
  std::int64_t next_reserve_id = 1;

  [[nodiscard]] Amount total_loan() const;
  [[nodiscard]] const Validator* find_validator(const ValidatorId& id) const;
  [[nodiscard]] const PoolState* find_pool(const std::string& asset) const;
  [[nodiscard]] Amount delegated_to(const ValidatorId& id) const;
  [[nodiscard]] std::vector<std::string> collateral_assets() const;

  friend bool operator==(const EpochLedger&, const EpochLedger&) = default;
};

struct GenesisSpec {
  std::vector<AssetId> assets;
  std::vector<Validator> validators;
  Epoch epoch = 0;
};

/// Empty ledger: no reserves, zero pools, controller at its initial target.
/// Throws InvalidArgument unless exactly one asset is the NST.
EpochLedger genesis(const GenesisSpec& spec, const ProtocolParams& params);

struct DepositRequest {
  Address owner;
  std::string asset;
  ValidatorId validator;
  Amount tokens;
  Epoch lock_len = 0;
};

/// Opens a reserve with no loan; the next requote sizes the loan.
/// Returns the reserve id.
std::int64_t deposit_collateral(EpochLedger& ledger, const DepositRequest& request);

/// Spends credits from an address's account for a named service.
void consume_credits(EpochLedger& ledger, const Address& address, const std::string& service, Amount amount);

struct ReserveValuation {
  std::int64_t id = 0;
  std::string asset;
  Amount value;  // S * P
  Amount loan;
  bool undercollateralised = false;  // L > S * P
};

struct Valuation {
  Epoch epoch = 0;
  std::vector<ReserveValuation> reserves;
  Amount total;
  std::map<std::string, Amount> by_asset;
  std::size_t flagged = 0;
};

/// Marks every reserve at `at`. Throws MissingPrice for an asset that has
/// a nonzero reserve but no price.
Valuation mark_to_market(const EpochLedger& ledger, const PriceBook& book, Epoch at);

/// Runs one epoch: mark to market, requote, slashing, staking-reward
/// accrual, reward plan and distribution, controller update, credit round
/// rollover. Missing prices raise MissingPrice naming the asset.
EpochLedger advance_epoch(const EpochLedger& ledger, const ProtocolParams& params, const Market& market);
EpochLedger advance_epoch(const EpochLedger& ledger, const ProtocolParams& params, const PriceBook& book);

/// Invariant checks between two consecutive snapshots. Empty when all hold.
std::vector<std::string> invariant_violations(const EpochLedger& prev, const EpochLedger& next,
                                              const ProtocolParams& params, const Market& market);

}  // namespace poel
