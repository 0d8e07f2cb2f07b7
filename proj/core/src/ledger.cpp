#include "poel/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "poel/error.hpp"
#include "poel/risk.hpp"
#include "poel/staking.hpp"

namespace poel {

double Market::demand_at(const std::string& asset, Epoch epoch) const {
  const auto it = demand.find(asset);
  if (it == demand.end()) return 0.0;
  const Epoch idx = epoch - book.first_epoch;
  if (idx < 0 || idx >= static_cast<Epoch>(it->second.size())) return 0.0;
  return std::max(it->second[static_cast<std::size_t>(idx)], 0.0);
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Curtailment: return "curtailment";
    case EventKind::Extension: return "extension";
    case EventKind::Slash: return "slash";
    case EventKind::Ejection: return "ejection";
    case EventKind::WashTrade: return "wash_trade";
    case EventKind::Undercollateralised: return "undercollateralised";
    case EventKind::Inadmissible: return "inadmissible";
    case EventKind::InfeasibleTargets: return "infeasible_targets";
    case EventKind::CeilingBinding: return "ceiling_binding";
    case EventKind::CreditDeficit: return "credit_deficit";
    case EventKind::StakeRatioBreach: return "stake_ratio_breach";
    case EventKind::UnstakeReleased: return "unstake_released";
  }
  return "unknown";
}

Amount EpochLedger::total_loan() const {
  Amount total;
  for (const auto& r : reserves) total += r.loan;
  return total;
}

const Validator* EpochLedger::find_validator(const ValidatorId& id) const {
  for (const auto& v : validators) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const PoolState* EpochLedger::find_pool(const std::string& asset) const {
  for (const auto& p : pools) {
    if (p.asset == asset) return &p;
  }
  return nullptr;
}

Amount EpochLedger::delegated_to(const ValidatorId& id) const {
  Amount total;
  for (const auto& r : reserves) {
    if (r.validator == id) total += r.loan;
  }
  return total;
}

std::vector<std::string> EpochLedger::collateral_assets() const {
  std::vector<std::string> out;
  for (const auto& a : assets) {
    if (!a.is_nst) out.push_back(a.symbol);
  }
  return out;
}

EpochLedger genesis(const GenesisSpec& spec, const ProtocolParams& params) {
  require_valid(params);
  EpochLedger l;
  l.epoch = spec.epoch;
  l.genesis_epoch = spec.epoch;
  std::set<std::string> seen;
  int nst_count = 0;
  for (const auto& a : spec.assets) {
    if (a.symbol.empty()) throw InvalidArgument("asset symbol must not be empty");
    if (!seen.insert(a.symbol).second) throw InvalidArgument("duplicate asset '" + a.symbol + "'");
    if (a.is_nst) {
      ++nst_count;
      l.nst = a.symbol;
    }
  }
  if (nst_count != 1) throw InvalidArgument("exactly one asset must be the native staking token");
  l.assets = spec.assets;

  std::set<std::string> ids;
  for (const auto& v : spec.validators) {
    if (!ids.insert(v.id).second) throw InvalidArgument("duplicate validator '" + v.id + "'");
    if (v.direct_stake.is_negative() || v.min_stake_req.is_negative()) {
      throw InvalidArgument("validator '" + v.id + "' has a negative stake");
    }
    if (v.active) l.total_direct_stake += v.direct_stake;
  }
  l.validators = spec.validators;

  for (const auto& a : l.assets) {
    if (a.is_nst) continue;
    PoolState p;
    p.asset = a.symbol;
    l.pools.push_back(p);
  }
  l.controller.target = params.initial_target_eff;
  l.borrow_ceiling = collateral::ceiling_from_direct_stake(l.total_direct_stake, params);
  return l;
}

std::int64_t deposit_collateral(EpochLedger& ledger, const DepositRequest& request) {
  if (!request.tokens.is_positive()) throw InvalidArgument("deposit must be positive");
  if (request.lock_len < 0) throw InvalidArgument("lock length must be >= 0");
  const auto asset = std::find_if(ledger.assets.begin(), ledger.assets.end(),
                                  [&](const AssetId& a) { return a.symbol == request.asset; });
  if (asset == ledger.assets.end()) throw InvalidArgument("unknown asset '" + request.asset + "'");
  if (asset->is_nst) throw InvalidArgument("the native staking token cannot back a reserve");
  const Validator* v = ledger.find_validator(request.validator);
  if (v == nullptr) throw InvalidArgument("unknown validator '" + request.validator + "'");
  if (!v->active) throw InvalidArgument("validator '" + request.validator + "' is not active");

  ReserveState r;
  r.id = ledger.next_reserve_id++;
  r.owner = request.owner;
  r.asset = request.asset;
  r.validator = request.validator;
  r.size = request.tokens;
  r.lock_start = ledger.epoch;
  r.lock_len = request.lock_len;
  ledger.reserves.push_back(r);
  return r.id;
}

void consume_credits(EpochLedger& ledger, const Address& address, const std::string& service, Amount amount) {
  const auto it = ledger.credits.accounts.find(address);
  if (it == ledger.credits.accounts.end()) throw InvalidArgument("no credit account for '" + address + "'");
  it->second = credits::consume(it->second, service, amount);
}

Valuation mark_to_market(const EpochLedger& ledger, const PriceBook& book, Epoch at) {
  Valuation v;
  v.epoch = at;
  for (const auto& r : ledger.reserves) {
    ReserveValuation rv;
    rv.id = r.id;
    rv.asset = r.asset;
    rv.loan = r.loan;
    if (r.size.is_positive() || r.loan.is_positive()) {
      rv.value = r.size.scaled(book.require_price(r.asset, at));
    }
    rv.undercollateralised = rv.loan > rv.value;
    if (rv.undercollateralised) ++v.flagged;
    v.total += rv.value;
    v.by_asset[r.asset] += rv.value;
    v.reserves.push_back(rv);
  }
  return v;
}

namespace {

void emit(EpochLedger& l, EventKind kind, std::string subject, std::string detail = {}) {
  l.events.push_back({kind, std::move(subject), std::move(detail)});
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Simple returns of the NST-denominated price over (to - lookback, to].
std::vector<double> numeraire_returns(const PriceBook& book, const std::string& asset, Epoch to, int lookback) {
  std::vector<double> out;
  for (Epoch e = to - lookback + 1; e <= to; ++e) {
    const auto p0 = book.price(asset, e - 1);
    const auto p1 = book.price(asset, e);
    if (!p0 || !p1 || !(*p0 > 0.0)) throw InsufficientData("not enough price history for '" + asset + "'");
    out.push_back(*p1 / *p0 - 1.0);
  }
  return out;
}

void curtail(EpochLedger& l, ReserveState& r, Amount amount, Epoch at, const ProtocolParams& params,
             const std::string& why) {
  if (!amount.is_positive()) return;
  r.loan -= amount;
  l.protocol_held += amount;
  l.unstake_queue.push_back(staking::request_unstake(amount, at, l.protocol_held, params));
  emit(l, EventKind::Curtailment, "reserve " + std::to_string(r.id), why + " " + amount.to_string());
}

/// Reduces delegation to each validator down to its liveness ceiling,
/// newest reserves first. Inactive validators get no delegation at all.
void enforce_liveness(EpochLedger& l, Epoch at, const ProtocolParams& params) {
  for (const auto& v : l.validators) {
    const Amount cap = v.active ? staking::liveness_ceiling(v, params) : Amount{};
    Amount excess = l.delegated_to(v.id) - cap;
    for (auto it = l.reserves.rbegin(); it != l.reserves.rend() && excess.is_positive(); ++it) {
      if (it->validator != v.id || !it->loan.is_positive()) continue;
      const Amount cut = min(excess, it->loan);
      curtail(l, *it, cut, at, params, v.active ? "liveness ceiling" : "validator inactive");
      excess -= cut;
    }
  }
}

void recompute_direct_stake(EpochLedger& l) {
  l.total_direct_stake = Amount{};
  for (const auto& v : l.validators) {
    if (v.active) l.total_direct_stake += v.direct_stake;
  }
}

void reweight_targets(EpochLedger& l, const ProtocolParams& params, const PriceBook& book, Epoch at) {
  const auto rules = collateral::default_rules(params);
  risk::WeightProblem problem;
  problem.assets.push_back(l.nst);
  problem.nst_index = 0;
  std::vector<std::vector<double>> columns;
  columns.push_back(book.reference_returns(l.nst, at, params.risk_lookback));

  for (const auto& asset : l.collateral_assets()) {
    const auto q = collateral::qualify_asset(asset, book, at, rules);
    bool ok = q.admissible;
    std::vector<double> col;
    if (ok) {
      try {
        col = book.reference_returns(asset, at, params.risk_lookback);
      } catch (const InsufficientData&) {
        ok = false;
      }
    }
    if (!ok) {
      std::string why;
      for (const auto& f : q.failed) why += (why.empty() ? "" : ", ") + f;
      if (why.empty()) why = "insufficient history";
      if (l.admissible[asset] || !l.targets.contains(asset)) emit(l, EventKind::Inadmissible, asset, why);
      l.admissible[asset] = false;
      continue;
    }
    l.admissible[asset] = true;
    problem.assets.push_back(asset);
    columns.push_back(std::move(col));
  }

  for (const auto& col : columns) problem.vols.push_back(risk::realized_volatility(col));
  problem.correlations = risk::correlation(columns);
  problem.returns = std::move(columns);

  try {
    const auto tw = risk::target_weights(problem, params);
    std::map<std::string, double> targets;
    for (const auto& a : l.assets) targets[a.symbol] = tw.weight_of(a.symbol);
    l.targets = std::move(targets);
  } catch (const Infeasible& e) {
    emit(l, EventKind::InfeasibleTargets, "basket", e.what());
    if (l.targets.empty()) {
      for (const auto& a : l.assets) l.targets[a.symbol] = a.is_nst ? 1.0 : 0.0;
    }
  }
}

/// Step 2: quotes, global multiplier, curtailments and extensions.
void requote(EpochLedger& l, const ProtocolParams& params, const PriceBook& book, Epoch at,
             const Valuation& valuation) {
  const bool reweight = l.targets.empty() || (params.reweight_interval > 0 && at % params.reweight_interval == 0);
  if (reweight) reweight_targets(l, params, book, at);

  const auto assets = l.collateral_assets();
  double basket_total = 0.0;
  double target_total = 0.0;
  for (const auto& a : assets) {
    const auto it = valuation.by_asset.find(a);
    if (it != valuation.by_asset.end()) basket_total += it->second.to_double();
    target_total += l.targets[a];
  }

  std::map<std::string, collateral::CollateralQuote> quotes;
  for (const auto& a : assets) {
    const double target = target_total > 0.0 ? l.targets[a] / target_total : 0.0;
    if (l.admissible[a] && target > 0.0) {
      const auto it = valuation.by_asset.find(a);
      const double value = it == valuation.by_asset.end() ? 0.0 : it->second.to_double();
      const double weight = basket_total > 0.0 ? value / basket_total : 0.0;
      quotes[a] = collateral::collateral_rate(a, weight, target, params);
    } else {
      collateral::CollateralQuote q;
      q.asset = a;
      q.rho = params.rho_min;
      if (const auto prev = l.quotes.find(a); prev != l.quotes.end()) {
        q.rho = prev->second.base_rho();
        q.delta_rho = prev->second.delta_rho;
      }
      quotes[a] = q;
    }
  }

  l.borrow_ceiling = collateral::ceiling_from_direct_stake(l.total_direct_stake, params);
  std::vector<collateral::CollateralPosition> positions;
  std::map<std::int64_t, double> prices;
  for (const auto& r : l.reserves) {
    if (!r.size.is_positive()) continue;
    const double p = book.require_price(r.asset, at);
    prices[r.id] = p;
    positions.push_back({r.size.to_double(), p, quotes[r.asset].rho});
  }
  const auto mr = collateral::global_multiplier(positions, l.borrow_ceiling.to_double());
  l.multiplier = mr.multiplier;
  if (mr.all_curtailed) {
    emit(l, EventKind::CeilingBinding, "basket", "zero borrow ceiling; all loans curtailed");
  } else if (mr.multiplier > 1.0) {
    emit(l, EventKind::CeilingBinding, "basket", "multiplier " + fmt(mr.multiplier));
  }
  for (auto& [a, q] : quotes) q = collateral::with_multiplier(q, mr.multiplier);
  l.quotes = std::move(quotes);

  std::vector<Amount> targets(l.reserves.size());
  for (std::size_t i = 0; i < l.reserves.size(); ++i) {
    const auto& r = l.reserves[i];
    const Validator* v = l.find_validator(r.validator);
    if (mr.all_curtailed || !r.size.is_positive() || v == nullptr || !v->active) continue;
    targets[i] = collateral::supported_loan(r.size, prices[r.id], l.quotes[r.asset].rho);
  }
  // The multiplier is solved in floating point; trim any residue so the
  // fixed-point total respects the ceiling exactly.
  Amount excess = sum(targets) - l.borrow_ceiling;
  while (excess.is_positive()) {
    const auto largest = std::max_element(targets.begin(), targets.end());
    const Amount cut = min(excess, *largest);
    *largest -= cut;
    excess -= cut;
  }

  for (std::size_t i = 0; i < l.reserves.size(); ++i) {
    auto& r = l.reserves[i];
    if (targets[i] < r.loan) curtail(l, r, r.loan - targets[i], at, params, "requote");
  }
  enforce_liveness(l, at, params);

  const bool window_open = params.extension_interval <= 1 || at % params.extension_interval == 0;
  if (!window_open) return;
  std::map<ValidatorId, Amount> headroom;
  for (const auto& v : l.validators) {
    if (v.active) headroom[v.id] = staking::liveness_ceiling(v, params) - l.delegated_to(v.id);
  }
  for (std::size_t i = 0; i < l.reserves.size(); ++i) {
    auto& r = l.reserves[i];
    if (!(targets[i] > r.loan)) continue;
    const double target_w = target_total > 0.0 ? l.targets[r.asset] / target_total : 0.0;
    if (!l.admissible[r.asset] || !(target_w > 0.0)) continue;
    const auto h = headroom.find(r.validator);
    if (h == headroom.end() || !h->second.is_positive()) continue;
    const Amount ext = min(targets[i] - r.loan, h->second);
    r.loan += ext;
    h->second -= ext;
    emit(l, EventKind::Extension, "reserve " + std::to_string(r.id), ext.to_string());
  }
}

/// Step 3: slashing and ejection.
void apply_faults(EpochLedger& l, const ProtocolParams& params, const Market& market, Epoch at) {
  const auto it = market.faults.find(at);
  if (it == market.faults.end()) return;
  for (const auto& fault : it->second) {
    auto v = std::find_if(l.validators.begin(), l.validators.end(),
                          [&](const Validator& x) { return x.id == fault.validator; });
    if (v == l.validators.end() || !v->active) continue;

    std::vector<std::size_t> idx;
    std::vector<ReserveState> subset;
    std::vector<double> prices;
    for (std::size_t i = 0; i < l.reserves.size(); ++i) {
      const auto& r = l.reserves[i];
      if (r.validator != v->id || !r.loan.is_positive()) continue;
      idx.push_back(i);
      subset.push_back(r);
      prices.push_back(market.book.require_price(r.asset, at));
    }
    const auto res = staking::slash(subset, prices, params.varpi);
    for (std::size_t k = 0; k < idx.size(); ++k) l.reserves[idx[k]] = res.reserves[k];
    Amount direct_cut;
    if (fault.slash_direct) {
      direct_cut = v->direct_stake.scaled(params.varpi);
      v->direct_stake -= direct_cut;
    }
    ++l.risk.slashes;
    emit(l, EventKind::Slash, v->id,
         "loans " + res.slashed.to_string() + ", direct " + direct_cut.to_string() +
             (res.shortfall.is_positive() ? ", shortfall " + res.shortfall.to_string() : ""));

    if (v->direct_stake + l.delegated_to(v->id) < v->min_stake_req) {
      v->active = false;
      ++l.risk.ejections;
      emit(l, EventKind::Ejection, v->id, "stake below minimum after slashing");
    }
  }
  recompute_direct_stake(l);
  enforce_liveness(l, at, params);
}

void update_pools(EpochLedger& l, const ProtocolParams& params, const Market& market, Epoch at) {
  Amount deposited_total;
  Amount available_total;
  for (auto& p : l.pools) {
    p.tokens = Amount{};
    p.loan = Amount{};
    for (const auto& r : l.reserves) {
      if (r.asset != p.asset) continue;
      p.tokens += r.size;
      p.loan += r.loan;
    }
    p.deposited = p.tokens.is_positive() ? p.tokens.scaled(market.book.require_price(p.asset, at)) : Amount{};
    p.utilised = min(Amount::from_double(market.demand_at(p.asset, at)), p.deposited);
    p.available = p.deposited - p.utilised;
    const auto fee = market.fee_rate.find(p.asset);
    p.fees = fee == market.fee_rate.end() ? Amount{} : p.utilised.scaled(fee->second);
    p.has_efficiency = p.deposited.is_positive();
    p.efficiency = p.has_efficiency ? rewards::capital_efficiency(p.available, p.deposited) : 0.0;
    if (p.has_efficiency) l.pool_efficiency[p.asset].push(p.efficiency, params.m_win, params.n_win);
    deposited_total += p.deposited;
    available_total += p.available;
  }
  if (deposited_total.is_positive()) {
    l.cda_efficiency.push(rewards::capital_efficiency(available_total, deposited_total), params.m_win,
                          params.n_win);
  }
}

/// Step 5: budget, lending-fee weights, allocation and per-reserve payout.
void distribute(EpochLedger& l, const ProtocolParams& params, Epoch at) {
  const double eff = l.cda_efficiency.empty() ? l.controller.target : l.cda_efficiency.last_ma_m();
  const Amount budget =
      rewards::epoch_reward_budget(l.total_loan(), params.srr, eff, l.controller.target, l.reward_pool, params);

  std::vector<std::string> names;
  std::vector<Amount> loans;
  std::vector<double> effs;
  for (const auto& p : l.pools) {
    if (!p.loan.is_positive()) continue;
    names.push_back(p.asset);
    loans.push_back(p.loan);
    const auto s = l.pool_efficiency.find(p.asset);
    effs.push_back(s == l.pool_efficiency.end() ? 0.0 : s->second.last_ma_m());
  }
  l.plan = rewards::RewardPlan{};
  if (names.empty() || !budget.is_positive()) return;

  const double e_max = *std::max_element(effs.begin(), effs.end());
  const double e_min = *std::min_element(effs.begin(), effs.end());
  std::vector<double> weights;
  for (double e : effs) weights.push_back(rewards::pool_weight(e, e_max, e_min, params));

  l.plan = rewards::allocate_rewards(names, loans, weights, budget);
  if (l.plan.empty()) return;
  l.reward_pool -= budget;
  l.cumulative_distributed += budget;

  for (std::size_t j = 0; j < names.size(); ++j) {
    std::vector<std::size_t> idx;
    std::vector<double> tenure_w;
    for (std::size_t i = 0; i < l.reserves.size(); ++i) {
      const auto& r = l.reserves[i];
      if (r.asset != names[j] || !r.loan.is_positive()) continue;
      const double elapsed = static_cast<double>(std::min(at - r.lock_start, r.lock_len));
      const double inc = rewards::tenure_incentive(elapsed, params.tenure_min_fraction, 1.0, params.k,
                                                   params.e_mid, params.nu);
      idx.push_back(i);
      tenure_w.push_back(r.loan.to_double() * inc);
    }
    const auto parts = allocate(l.plan.distributable[j], std::span<const double>(tenure_w));
    for (std::size_t k = 0; k < idx.size(); ++k) l.reserves[idx[k]].rewards_accrued += parts[k];
  }
}

void risk_snapshot(EpochLedger& l, const ProtocolParams& params, const Market& market, Epoch at) {
  auto& rs = l.risk;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<std::vector<double>> columns;
  double total = 0.0;
  bool have_history = true;
  for (const auto& p : l.pools) {
    rs.transactional_value += p.utilised.to_double();
    rs.fees += p.fees.to_double();
    const auto tape = market.book.trades_in_epochs(p.asset, at, at);
    const auto flags = risk::detect_wash_trades(tape, params.wash_price_tol, market.book.steps_per_epoch);
    rs.wash_flags += static_cast<int>(flags.size());
    if (!flags.empty()) emit(l, EventKind::WashTrade, p.asset, std::to_string(flags.size()) + " pairs");

    const double value = p.deposited.to_double();
    if (!(value > 0.0)) continue;
    names.push_back(p.asset);
    values.push_back(value);
    total += value;
    try {
      auto col = numeraire_returns(market.book, p.asset, at, params.risk_lookback);
      if (col.size() >= risk::min_samples(params.ci)) {
        rs.kappa_sum += risk::expected_shortfall(col, params.ci) * value;
      }
      columns.push_back(std::move(col));
    } catch (const InsufficientData&) {
      have_history = false;
    }
  }
  rs.kappa_ok = rs.kappa_sum <= params.kappa_limit;

  if (total > 0.0) {
    std::vector<double> w;
    for (double v : values) w.push_back(v / total);
    if (have_history && columns.size() == names.size() && params.risk_lookback >= 2) {
      std::vector<double> vols;
      for (const auto& c : columns) vols.push_back(risk::realized_volatility(c));
      rs.basket_variance = risk::portfolio_variance(w, vols, risk::correlation(columns)) * total * total;
    }
    double before = 0.0;
    double after = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto p0 = market.book.price(names[i], at - 1);
      const auto p1 = market.book.price(names[i], at);
      if (!p0 || !p1) {
        ok = false;
        break;
      }
      const double tokens = l.find_pool(names[i])->tokens.to_double();
      before += tokens * *p0;
      after += tokens * *p1;
    }
    if (ok && before > 0.0) {
      rs.basket_return = after / before - 1.0;
      rs.has_return = true;
    }
  }
}

void roll_credits(EpochLedger& l, const ProtocolParams& params, const Market& market, Epoch at) {
  if (params.round_len <= 0 || at <= l.genesis_epoch) return;
  const Epoch offset = at - l.genesis_epoch - 1;
  if (offset % params.round_len != 0) return;
  auto& cs = l.credits;
  const int round = static_cast<int>(offset / params.round_len) + 1;

  if (cs.round > 0 && !cs.history.empty()) {
    auto& rec = cs.history.back();
    for (const auto& [addr, acct] : cs.accounts) {
      const auto ro = credits::round_rollover(acct, Amount{});
      rec.consumed += ro.replenishment;
      rec.expired += ro.expired;
    }
  }

  std::map<std::string, Amount> caps;
  std::map<std::string, std::vector<std::pair<Address, Amount>>> holders;
  for (const auto& p : l.pools) {
    if (!p.tokens.is_positive()) continue;
    caps[p.asset] = credits::asset_cap(p.tokens, market.book.require_price(p.asset, at), params.gamma_for(p.asset));
  }
  for (const auto& r : l.reserves) {
    if (!r.size.is_positive()) continue;
    auto& list = holders[r.asset];
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& h) { return h.first == r.owner; });
    if (it == list.end()) {
      list.emplace_back(r.owner, r.size);
    } else {
      it->second += r.size;
    }
  }

  const Amount delta = credits::budget_increment(round, params);
  const auto b = credits::credit_budget(cs.budget, delta, cs.issued);
  if (b.deficit.is_positive()) emit(l, EventKind::CreditDeficit, "round " + std::to_string(round), b.deficit.to_string());
  const auto fitted = credits::fit_caps(caps, b.budget);
  if (fitted.deficit.is_positive()) {
    emit(l, EventKind::CreditDeficit, "round " + std::to_string(round), "caps scaled, short " + fitted.deficit.to_string());
  }

  std::map<Address, Amount> account_caps;
  for (const auto& [addr, acct] : cs.accounts) account_caps[addr] = Amount{};
  for (const auto& [asset, cap] : fitted.caps) {
    const auto& list = holders[asset];
    std::vector<Amount> sizes;
    for (const auto& h : list) sizes.push_back(h.second);
    const auto parts = allocate(cap, std::span<const Amount>(sizes));
    for (std::size_t i = 0; i < list.size(); ++i) account_caps[list[i].first] += parts[i];
  }

  std::map<Address, credits::CreditAccount> accounts;
  for (const auto& [addr, cap] : account_caps) {
    const auto prev = cs.accounts.find(addr);
    credits::CreditAccount base;
    base.address = addr;
    if (prev != cs.accounts.end()) base = prev->second;
    accounts[addr] = credits::round_rollover(base, cap).account;
  }
  cs.accounts = std::move(accounts);
  cs.round = round;
  cs.budget = b.budget;
  cs.issued = fitted.issued;
  cs.asset_caps = fitted.caps;
  credits::RoundRecord rec;
  rec.round = round;
  rec.start_epoch = at;
  rec.budget = b.budget;
  rec.delta = delta;
  rec.requested = fitted.requested;
  rec.issued = fitted.issued;
  rec.deficit = b.deficit + fitted.deficit;
  cs.history.push_back(rec);
}

}  // namespace

EpochLedger advance_epoch(const EpochLedger& ledger, const ProtocolParams& params, const Market& market) {
  EpochLedger l = ledger;
  const Epoch at = ledger.epoch + 1;
  l.epoch = at;
  l.events.clear();
  l.risk = RiskSnapshot{};
  l.plan = rewards::RewardPlan{};
  l.staking_rewards = Amount{};

  // 1. mark to market
  const auto valuation = mark_to_market(l, market.book, at);
  for (const auto& rv : valuation.reserves) {
    if (rv.undercollateralised) {
      emit(l, EventKind::Undercollateralised, "reserve " + std::to_string(rv.id),
           "loan " + rv.loan.to_string() + " > value " + rv.value.to_string());
    }
  }

  // 2. requote
  recompute_direct_stake(l);
  requote(l, params, market.book, at, valuation);
  const Amount loans = l.total_loan();
  const auto ceiling = collateral::borrow_ceiling(l.total_direct_stake + loans, loans, params);
  l.w_nst = ceiling.w_nst;
  double v_ma = 0.0;
  for (const auto& [asset, value] : valuation.by_asset) v_ma += value.to_double();
  const auto ratio = collateral::stake_ratio_check(v_ma, l.total_direct_stake.to_double(), params);
  l.stake_ratio = ratio.ratio;
  l.stake_ratio_ok = ratio.pass;
  if (!ratio.pass) emit(l, EventKind::StakeRatioBreach, "basket", "ratio " + fmt(ratio.ratio));

  // 3. slashing
  apply_faults(l, params, market, at);

  // 4. staking reward accrual
  const bool open = params.accrual_epochs <= 0 || at - l.genesis_epoch <= params.accrual_epochs;
  l.staking_rewards = staking::accrue_staking_rewards(l.total_loan(), params.srr, open);
  l.reward_pool += l.staking_rewards;
  l.cumulative_staking_rewards += l.staking_rewards;

  // 5. efficiency, reward plan and distribution
  update_pools(l, params, market, at);
  distribute(l, params, at);
  risk_snapshot(l, params, market, at);

  // 6. target efficiency controller
  l.controller = rewards::controller_update(l.controller, l.cda_efficiency.derivatives_m(),
                                            l.cda_efficiency.derivatives_n(), params);

  // 7. credit round rollover
  roll_credits(l, params, market, at);

  const auto released = staking::release_matured(l.unstake_queue, at);
  if (released.released.is_positive()) {
    l.protocol_held -= released.released;
    l.unstaked_total += released.released;
    emit(l, EventKind::UnstakeReleased, "protocol", released.released.to_string());
  }
  l.unstake_queue = released.remaining;
  return l;
}

EpochLedger advance_epoch(const EpochLedger& ledger, const ProtocolParams& params, const PriceBook& book) {
  Market market;
  market.book = book;
  return advance_epoch(ledger, params, market);
}

std::vector<std::string> invariant_violations(const EpochLedger& prev, const EpochLedger& next,
                                              const ProtocolParams& params, const Market& market) {
  std::vector<std::string> out;
  auto fail = [&out](std::string s) { out.push_back(std::move(s)); };
  const Amount tol = kAmountTolerance;

  if (next.epoch != prev.epoch + 1) fail("epoch index did not advance by one");
  if (next.reward_pool.is_negative()) fail("reward pool negative: " + next.reward_pool.to_string());
  if (next.reward_pool != prev.reward_pool + next.staking_rewards - next.plan.budget) {
    fail("reward pool recursion broken");
  }
  if (next.plan.budget > prev.reward_pool + next.staking_rewards) fail("distributed more than the reward pool held");
  if (!next.plan.empty()) {
    if (sum(next.plan.distributable) != next.plan.budget) fail("sum DR != R");
    if (!approx_equal(sum(next.plan.interest_payable), Amount{})) fail("sum IP != 0");
  }
  if (next.cumulative_distributed > next.cumulative_staking_rewards) fail("lifetime rewards exceed staking rewards");

  for (const auto& [asset, q] : next.quotes) {
    if (!(q.rho >= 1.0)) fail("rho < 1 for " + asset);
    if (!(q.rho >= params.rho_min - 1e-12) && q.delta_rho >= 0.0) fail("rho below rho_min for " + asset);
  }
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  for (const auto& p : next.pools) {
    if (p.has_efficiency && !in_unit(p.efficiency)) fail("pool efficiency outside [0,1] for " + p.asset);
  }
  for (const auto& [asset, s] : next.pool_efficiency) {
    if (!s.empty() && (!in_unit(s.last_ma_m()) || !in_unit(s.last_ma_n()))) fail("pool MA outside [0,1]");
  }
  if (!next.cda_efficiency.empty() && !in_unit(next.cda_efficiency.raw.back())) fail("CDA efficiency outside [0,1]");
  if (!in_unit(next.controller.target)) fail("target efficiency outside [0,1]");

  std::set<std::string> slashed;
  for (const auto& e : next.events) {
    if (e.kind == EventKind::Slash) slashed.insert(e.subject);
  }
  for (const auto& r : next.reserves) {
    if (r.size.is_negative() || r.loan.is_negative()) fail("negative reserve size or loan");
    if (slashed.contains(r.validator) || !r.loan.is_positive()) continue;
    const auto q = next.quotes.find(r.asset);
    const auto price = market.book.price(r.asset, next.epoch);
    if (q == next.quotes.end() || !price) continue;
    if (r.loan.to_double() * q->second.rho > r.size.to_double() * *price * (1.0 + 1e-12) + 1e-12) {
      fail("reserve " + std::to_string(r.id) + " over-borrowed after requote");
    }
  }
  if (next.total_loan() > next.borrow_ceiling + tol) fail("total loans " + next.total_loan().to_string() + " exceed the borrow ceiling " + next.borrow_ceiling.to_string());

  for (const auto& v : next.validators) {
    const Amount delegated = next.delegated_to(v.id);
    const Amount cap = v.active ? staking::liveness_ceiling(v, params) : Amount{};
    if (delegated > cap + tol) fail("delegation above liveness ceiling for " + v.id);
  }

  for (const auto& [addr, acct] : next.credits.accounts) {
    if (acct.balance != acct.cap - acct.used()) fail("credit balance != cap - usage for " + addr);
    if (acct.balance.is_negative() || acct.balance > acct.cap) fail("credit balance outside [0, cap] for " + addr);
  }
  if (next.credits.budget.is_negative()) fail("credit budget negative");
  if (next.credits.issued > next.credits.budget) fail("credit caps exceed the round budget");

  Amount queued;
  for (const auto& t : next.unstake_queue) {
    queued += t.amount;
    if (t.release_epoch - t.request_epoch != params.unstake_epochs) fail("unstake ticket with wrong period");
    if (t.release_epoch <= next.epoch) fail("matured unstake ticket not released");
  }
  if (queued != next.protocol_held) fail("protocol-held NST does not match the unstake queue");
  return out;
}

}  // namespace poel
