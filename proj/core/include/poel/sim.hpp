#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "poel/decimal.hpp"
#include "poel/ledger.hpp"
#include "poel/params.hpp"

namespace poel::sim {

struct AssetSpec {
  std::string symbol;
  bool is_nst = false;
  double initial_price = 1.0;  // in the external reference unit
  double vol = 0.0;            // per-epoch log-return volatility
  double drift = 0.0;          // per-epoch log drift
  double spread = 0.0;
  double fee_rate = 0.0;
  double demand = 0.0;         // mean NST value utilised per epoch
  double demand_vol = 0.0;     // lognormal noise on demand
  double trade_volume = 100.0; // mean absolute volume per fill
  double wash_rate = 0.0;      // probability of a wash pair per epoch

  friend bool operator==(const AssetSpec&, const AssetSpec&) = default;
};

/// Demand on every pool is multiplied by `factor` from `epoch` on.
struct DemandStep {
  Epoch epoch = 0;
  double factor = 1.0;

  friend bool operator==(const DemandStep&, const DemandStep&) = default;
};

struct ValidatorSpec {
  ValidatorId id;
  Amount direct_stake;
  Amount min_stake_req;
  double fault_prob = 0.0;  // per epoch

  friend bool operator==(const ValidatorSpec&, const ValidatorSpec&) = default;
};

struct AgentSpec {
  Address address;
  std::map<std::string, Amount> endowment;  // LP tokens per asset
  double deposit_rate = 0.25;                // share of the remaining endowment value per epoch
  std::vector<Epoch> lock_menu{0, 10, 30, 90};
  double lock_cost = 0.0;                    // PV penalty per epoch locked
  double credit_use = 0.5;                   // share of the credit balance spent per epoch

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct Scenario {
  std::uint64_t seed = 1;
  Epoch epochs = 100;
  Epoch warmup = 0;  // pre-genesis history epochs; 0 derives it from the lookbacks
  int steps_per_epoch = 8;
  std::vector<AssetSpec> assets;
  std::vector<ValidatorSpec> validators;
  std::vector<AgentSpec> agents;
  std::vector<DemandStep> demand_steps;
  ProtocolParams params;

  [[nodiscard]] Epoch history_epochs() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Problems that stop a scenario from running, each with a field path.
std::vector<ParamViolation> validate(const Scenario& scenario);

/// Seeded generator with its own uniform and normal draws so streams are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Geometric Brownian reference paths for every asset over the warmup and
/// the program, numeraire prices P = ref / ref_NST, spreads and trade tapes.
PriceBook gen_prices(const Scenario& scenario);

/// Price book plus demand series, fee rates and validator faults.
Market gen_market(const Scenario& scenario);

struct AgentState {
  AgentSpec spec;
  std::map<std::string, Amount> remaining;

  explicit AgentState(AgentSpec s) : spec(std::move(s)), remaining(spec.endowment) {}
};

struct AgentAction {
  Epoch lock_len = 0;
  std::vector<DepositRequest> deposits;
};

/// Present value of locking for `lock_len` epochs under a constant interest
/// rate, minus the agent's lock cost.
double lock_value(Epoch lock_len, double interest_rate, double lock_cost, const ProtocolParams& params);

/// Rational deposit decision: the lock length with the highest lock_value
/// (longest on ties) and deposits split across held assets by pool weight.
AgentAction agent_step(const AgentState& agent, const EpochLedger& ledger, const ProtocolParams& params,
                       const PriceBook& book);

struct Trace {
  Scenario scenario;
  Market market;
  std::vector<EpochLedger> ledgers;  // genesis first, epochs + 1 entries
};

/// Runs a scenario to completion. Every epoch is checked against the ledger
/// invariants; a violation or engine failure throws EngineError with the epoch.
Trace run(const Scenario& scenario);

/// A small randomized scenario for property testing and benchmarks.
Scenario random_scenario(std::uint64_t seed, Epoch max_epochs = 200, int max_assets = 6, int max_agents = 20);

}  // namespace poel::sim
