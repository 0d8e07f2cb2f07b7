#include "poel/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "poel/error.hpp"
#include "poel/rewards.hpp"
#include "poel/staking.hpp"

namespace poel::sim {
namespace {

// splitmix64 finaliser, used to derive independent stream seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return mix(seed ^ mix(stream)); }

enum Stream : std::uint64_t { kPrices = 1, kTapes, kDemand, kFaults, kAgents };

double demand_factor(const Scenario& s, Epoch e) {
  double f = 1.0;
  for (const auto& step : s.demand_steps) {
    if (e >= step.epoch) f = step.factor;
  }
  return f;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

Epoch Scenario::history_epochs() const {
  if (warmup > 0) return warmup;
  return std::max<Epoch>(params.risk_lookback, params.qualification_lookback) + 1;
}

std::vector<ParamViolation> validate(const Scenario& s) {
  std::vector<ParamViolation> out;
  for (auto v : poel::validate(s.params)) {
    v.field = "params." + v.field;
    out.push_back(std::move(v));
  }
  if (s.epochs < 0) out.push_back({"epochs", "epochs must be >= 0"});
  if (s.warmup < 0) out.push_back({"warmup", "warmup must be >= 0"});
  if (s.steps_per_epoch < 1) out.push_back({"steps_per_epoch", "steps_per_epoch must be >= 1"});

  std::set<std::string> symbols;
  int nst = 0;
  for (std::size_t i = 0; i < s.assets.size(); ++i) {
    const auto& a = s.assets[i];
    const std::string path = "assets[" + std::to_string(i) + "]";
    if (a.symbol.empty()) out.push_back({path + ".symbol", "symbol must not be empty"});
    if (!symbols.insert(a.symbol).second) out.push_back({path + ".symbol", "duplicate symbol '" + a.symbol + "'"});
    if (a.is_nst) ++nst;
    if (!(a.initial_price > 0.0)) out.push_back({path + ".initial_price", "initial price must be > 0"});
    if (!(a.vol >= 0.0)) out.push_back({path + ".vol", "volatility must be >= 0"});
    if (!(a.spread >= 0.0)) out.push_back({path + ".spread", "spread must be >= 0"});
    if (!(a.fee_rate >= 0.0)) out.push_back({path + ".fee_rate", "fee rate must be >= 0"});
    if (!(a.demand >= 0.0)) out.push_back({path + ".demand", "demand must be >= 0"});
    if (!(a.demand_vol >= 0.0)) out.push_back({path + ".demand_vol", "demand volatility must be >= 0"});
    if (!(a.trade_volume > 0.0)) out.push_back({path + ".trade_volume", "trade volume must be > 0"});
    if (!(a.wash_rate >= 0.0 && a.wash_rate <= 1.0)) out.push_back({path + ".wash_rate", "wash rate must lie in [0, 1]"});
  }
  if (nst != 1) out.push_back({"assets", "exactly one asset must be the native staking token"});

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.validators.size(); ++i) {
    const auto& v = s.validators[i];
    const std::string path = "validators[" + std::to_string(i) + "]";
    if (v.id.empty() || !ids.insert(v.id).second) out.push_back({path + ".id", "validator ids must be unique and non-empty"});
    if (v.direct_stake.is_negative()) out.push_back({path + ".direct_stake", "direct stake must be >= 0"});
    if (v.min_stake_req.is_negative()) out.push_back({path + ".min_stake_req", "minimum stake must be >= 0"});
    if (!(v.fault_prob >= 0.0 && v.fault_prob <= 1.0)) out.push_back({path + ".fault_prob", "fault probability must lie in [0, 1]"});
  }

  std::set<std::string> addrs;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    const std::string path = "agents[" + std::to_string(i) + "]";
    if (a.address.empty() || !addrs.insert(a.address).second) {
      out.push_back({path + ".address", "agent addresses must be unique and non-empty"});
    }
    for (const auto& [sym, amount] : a.endowment) {
      const auto it = std::find_if(s.assets.begin(), s.assets.end(), [&](const AssetSpec& x) { return x.symbol == sym; });
      if (it == s.assets.end()) out.push_back({path + ".endowment." + sym, "unknown asset"});
      else if (it->is_nst) out.push_back({path + ".endowment." + sym, "agents deposit LP tokens, not the native token"});
      if (amount.is_negative()) out.push_back({path + ".endowment." + sym, "endowment must be >= 0"});
    }
    if (!(a.deposit_rate >= 0.0 && a.deposit_rate <= 1.0)) out.push_back({path + ".deposit_rate", "deposit rate must lie in [0, 1]"});
    if (!(a.credit_use >= 0.0 && a.credit_use <= 1.0)) out.push_back({path + ".credit_use", "credit use must lie in [0, 1]"});
    if (!(a.lock_cost >= 0.0)) out.push_back({path + ".lock_cost", "lock cost must be >= 0"});
    if (a.lock_menu.empty()) out.push_back({path + ".lock_menu", "lock menu must not be empty"});
    for (Epoch l : a.lock_menu) {
      if (l < 0) out.push_back({path + ".lock_menu", "lock lengths must be >= 0"});
    }
  }
  for (std::size_t i = 0; i < s.demand_steps.size(); ++i) {
    if (!(s.demand_steps[i].factor >= 0.0)) {
      out.push_back({"demand_steps[" + std::to_string(i) + "].factor", "factor must be >= 0"});
    }
  }
  return out;
}

PriceBook gen_prices(const Scenario& s) {
  PriceBook book;
  const Epoch history = s.history_epochs();
  book.first_epoch = -history;
  book.steps_per_epoch = s.steps_per_epoch;
  const auto len = static_cast<std::size_t>(history + s.epochs + 1);

  const AssetSpec* nst = nullptr;
  for (const auto& a : s.assets) {
    if (a.is_nst) nst = &a;
  }
  if (nst == nullptr) throw InvalidArgument("scenario has no native staking token");
  book.nst_symbol = nst->symbol;

  Rng rng(stream_seed(s.seed, kPrices));
  std::map<std::string, std::vector<double>> ref;
  for (const auto& a : s.assets) ref[a.symbol].assign(len, a.initial_price);
  for (std::size_t i = 1; i < len; ++i) {
    for (const auto& a : s.assets) {
      auto& path = ref[a.symbol];
      const double z = rng.normal();
      path[i] = path[i - 1] * std::exp(a.drift - 0.5 * a.vol * a.vol + a.vol * z);
    }
  }

  const auto& ref_nst = ref[nst->symbol];
  for (const auto& a : s.assets) {
    book.reference[a.symbol] = ref[a.symbol];
    if (a.is_nst) continue;
    std::vector<double> p(len);
    for (std::size_t i = 0; i < len; ++i) p[i] = ref[a.symbol][i] / ref_nst[i];
    book.prices[a.symbol] = std::move(p);
    book.spreads[a.symbol].assign(len, a.spread);
  }

  Rng tape_rng(stream_seed(s.seed, kTapes));
  const auto spe = static_cast<std::int64_t>(s.steps_per_epoch);
  for (const auto& a : s.assets) {
    if (a.is_nst) continue;
    auto& tape = book.tapes[a.symbol];
    const auto& p = book.prices[a.symbol];
    for (std::size_t i = 0; i < len; ++i) {
      const Epoch e = book.first_epoch + static_cast<Epoch>(i);
      for (std::int64_t step = 0; step < spe; ++step) {
        const double u = tape_rng.uniform();
        const double z = tape_rng.normal();
        const double jitter = tape_rng.uniform() - 0.5;
        if (u < 0.5) continue;
        const double side = u < 0.75 ? 1.0 : -1.0;
        tape.push_back({e * spe + step, side * a.trade_volume * std::exp(0.5 * z), p[i] * (1.0 + a.spread * jitter)});
      }
      const double w = tape_rng.uniform();
      const double v = tape_rng.uniform();
      if (w < a.wash_rate) {
        const double vol = a.trade_volume * (0.5 + v);
        const std::int64_t ts = e * spe + spe - 1;
        tape.push_back({ts, vol, p[i]});
        tape.push_back({ts, -vol, p[i]});
      }
    }
  }
  return book;
}

Market gen_market(const Scenario& s) {
  Market m;
  m.book = gen_prices(s);
  const auto len = static_cast<std::size_t>(s.history_epochs() + s.epochs + 1);

  Rng demand_rng(stream_seed(s.seed, kDemand));
  for (const auto& a : s.assets) {
    if (a.is_nst) continue;
    m.fee_rate[a.symbol] = a.fee_rate;
    std::vector<double> d(len);
    for (std::size_t i = 0; i < len; ++i) {
      const Epoch e = m.book.first_epoch + static_cast<Epoch>(i);
      const double z = demand_rng.normal();
      d[i] = a.demand * demand_factor(s, e) * std::exp(a.demand_vol * z - 0.5 * a.demand_vol * a.demand_vol);
    }
    m.demand[a.symbol] = std::move(d);
  }

  Rng fault_rng(stream_seed(s.seed, kFaults));
  for (Epoch e = 1; e <= s.epochs; ++e) {
    for (const auto& v : s.validators) {
      if (fault_rng.uniform() < v.fault_prob) m.faults[e].push_back({v.id, true});
    }
  }
  return m;
}

double lock_value(Epoch lock_len, double interest_rate, double lock_cost, const ProtocolParams& params) {
  const auto incentive = [&params](double t) {
    return rewards::tenure_incentive(t, params.tenure_min_fraction, 1.0, params.k, params.e_mid, params.nu);
  };
  const auto rate = [interest_rate](double) { return interest_rate; };
  const double horizon = static_cast<double>(lock_len);
  return rewards::present_value(incentive, rate, horizon) - lock_cost * horizon;
}

AgentAction agent_step(const AgentState& agent, const EpochLedger& ledger, const ProtocolParams& params,
                       const PriceBook& book) {
  AgentAction action;
  std::vector<std::string> assets;
  std::vector<double> prices;
  for (const auto& [sym, amount] : agent.remaining) {
    if (!amount.is_positive()) continue;
    const auto adm = ledger.admissible.find(sym);
    if (adm != ledger.admissible.end() && !adm->second) continue;
    const auto p = book.price(sym, ledger.epoch);
    if (!p || !(*p > 0.0)) continue;
    assets.push_back(sym);
    prices.push_back(*p);
  }
  if (assets.empty() || !(agent.spec.deposit_rate > 0.0)) return action;

  const Validator* best = nullptr;
  Amount best_room;
  for (const auto& v : ledger.validators) {
    if (!v.active) continue;
    const Amount room = staking::liveness_ceiling(v, params) - ledger.delegated_to(v.id);
    if (best == nullptr || room > best_room) {
      best = &v;
      best_room = room;
    }
  }
  if (best == nullptr) return action;

  double rate = 0.0;
  if (!ledger.plan.interest_rate.empty()) {
    for (double r : ledger.plan.interest_rate) rate += r;
    rate = std::max(rate / static_cast<double>(ledger.plan.interest_rate.size()), 0.0);
  }
  double best_pv = -HUGE_VAL;
  for (Epoch len : agent.spec.lock_menu) {
    const double pv = lock_value(len, rate, agent.spec.lock_cost, params);
    if (pv > best_pv || (pv == best_pv && len > action.lock_len)) {
      best_pv = pv;
      action.lock_len = len;
    }
  }

  std::vector<double> effs;
  std::vector<bool> known;
  for (const auto& sym : assets) {
    const auto s = ledger.pool_efficiency.find(sym);
    known.push_back(s != ledger.pool_efficiency.end() && !s->second.empty());
    effs.push_back(known.back() ? s->second.last_ma_m() : 0.0);
  }
  double e_max = 0.0;
  double e_min = 1.0;
  bool any = false;
  for (std::size_t i = 0; i < effs.size(); ++i) {
    if (!known[i]) continue;
    e_max = any ? std::max(e_max, effs[i]) : effs[i];
    e_min = any ? std::min(e_min, effs[i]) : effs[i];
    any = true;
  }
  std::vector<double> weights;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const double w = known[i] ? rewards::pool_weight(effs[i], e_max, e_min, params) : params.w_ceiling();
    weights.push_back(w);
    weight_sum += w;
  }

  double total_value = 0.0;
  for (std::size_t i = 0; i < assets.size(); ++i) total_value += agent.remaining.at(assets[i]).to_double() * prices[i];
  const double budget = agent.spec.deposit_rate * total_value;
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const Amount held = agent.remaining.at(assets[i]);
    const double value = budget * weights[i] / weight_sum;
    Amount tokens = min(Amount::from_double_floor(value / prices[i]), held);
    if (tokens < Amount::from_raw(1'000'000'000)) continue;
    action.deposits.push_back({agent.spec.address, assets[i], best->id, tokens, action.lock_len});
  }
  return action;
}

Trace run(const Scenario& scenario) {
  if (const auto problems = validate(scenario); !problems.empty()) {
    std::vector<std::string> parts;
    for (const auto& p : problems) parts.push_back(p.field + ": " + p.message);
    throw InvalidArgument("invalid scenario: " + join(parts));
  }
  const auto& params = scenario.params;
  Trace trace;
  trace.scenario = scenario;
  trace.market = gen_market(scenario);

  GenesisSpec g;
  for (const auto& a : scenario.assets) g.assets.push_back({a.symbol, a.is_nst});
  for (const auto& v : scenario.validators) g.validators.push_back({v.id, v.direct_stake, v.min_stake_req, true});
  trace.ledgers.reserve(static_cast<std::size_t>(scenario.epochs) + 1);
  trace.ledgers.push_back(genesis(g, params));

  std::vector<AgentState> agents;
  for (const auto& a : scenario.agents) agents.emplace_back(a);
  Rng agent_rng(stream_seed(scenario.seed, kAgents));

  for (Epoch e = 1; e <= scenario.epochs; ++e) {
    EpochLedger working = trace.ledgers.back();
    try {
      for (auto& agent : agents) {
        const auto action = agent_step(agent, working, params, trace.market.book);
        for (const auto& d : action.deposits) {
          deposit_collateral(working, d);
          agent.remaining[d.asset] -= d.tokens;
        }
      }
      for (auto& agent : agents) {
        const double u = agent_rng.uniform();
        const auto acct = working.credits.accounts.find(agent.spec.address);
        if (acct == working.credits.accounts.end()) continue;
        const Amount spend = acct->second.balance.scaled(agent.spec.credit_use * u);
        if (spend.is_positive()) consume_credits(working, agent.spec.address, "network_fees", spend);
      }
      EpochLedger next = advance_epoch(working, params, trace.market);
      if (const auto bad = invariant_violations(working, next, params, trace.market); !bad.empty()) {
        throw EngineError(e, "invariant violated: " + join(bad));
      }
      trace.ledgers.push_back(std::move(next));
    } catch (const EngineError&) {
      throw;
    } catch (const Error& err) {
      throw EngineError(e, err.what());
    }
  }
  return trace;
}

Scenario random_scenario(std::uint64_t seed, Epoch max_epochs, int max_assets, int max_agents) {
  Rng r(stream_seed(seed, 0xC0FFEE));
  auto uni = [&r](double lo, double hi) { return lo + (hi - lo) * r.uniform(); };
  auto pick = [&r](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(r.uniform() * static_cast<double>(hi - lo + 1));
  };

  Scenario s;
  s.seed = seed;
  s.epochs = pick(std::min<Epoch>(20, max_epochs), max_epochs);
  s.steps_per_epoch = static_cast<int>(pick(2, 8));

  auto& p = s.params;
  p.srr = uni(0.001, 0.01);
  p.accrual_epochs = r.uniform() < 0.5 ? 0 : static_cast<int>(pick(10, 150));
  p.extension_interval = static_cast<int>(pick(1, 3));
  p.unstake_epochs = static_cast<int>(pick(0, 10));
  p.c = r.uniform() < 0.5 ? 1 : 3;
  p.theta = uni(0.5, 4.0);
  p.zeta = uni(0.05, 1.0);
  p.round_len = static_cast<int>(pick(3, 20));
  p.w_nst_target = uni(0.5, 0.8);
  p.t_ratio = uni(0.2, 0.6);
  p.b_lower = r.uniform() < 0.3 ? 0.0 : uni(0.0005, 0.01);
  p.m_win = static_cast<int>(pick(2, 6));
  p.n_win = p.m_win + static_cast<int>(pick(2, 20));
  p.upsilon = uni(0.005, 0.05);
  p.psi = uni(0.005, 0.05);
  p.varpi = uni(0.0, 0.2);
  p.liveness_factor = uni(0.5, 2.0);
  p.gamma_default = uni(0.0, 0.05);
  p.credit_budget_initial = Amount::from_double(uni(0.0, 500.0));
  p.r_min = r.uniform() < 0.5 ? Amount{} : Amount::from_double(uni(0.0, 1.0));
  p.kappa_w = uni(0.5, 3.0);
  p.g_factor = uni(0.2, 2.0);

  const int n_assets = static_cast<int>(pick(2, std::max(2, max_assets)));
  s.assets.push_back({"NST", true, 1.0, uni(0.005, 0.03), uni(-0.001, 0.001)});
  for (int i = 1; i < n_assets; ++i) {
    AssetSpec a;
    a.symbol = "LP" + std::to_string(i);
    a.initial_price = uni(0.2, 5.0);
    a.vol = uni(0.005, 0.1);
    a.drift = uni(-0.003, 0.003);
    a.spread = uni(0.0, 0.02);
    a.fee_rate = uni(0.0, 0.01);
    a.demand = uni(0.0, 3000.0);
    a.demand_vol = uni(0.0, 0.5);
    a.trade_volume = uni(10.0, 500.0);
    a.wash_rate = r.uniform() < 0.3 ? uni(0.0, 0.2) : 0.0;
    s.assets.push_back(a);
  }

  const int n_validators = static_cast<int>(pick(1, 5));
  for (int i = 0; i < n_validators; ++i) {
    ValidatorSpec v;
    v.id = "val" + std::to_string(i);
    v.direct_stake = Amount::from_double(uni(1000.0, 20000.0));
    v.min_stake_req = Amount::from_double(uni(100.0, 800.0));
    v.fault_prob = r.uniform() < 0.5 ? 0.0 : uni(0.0, 0.05);
    s.validators.push_back(v);
  }

  const int n_agents = static_cast<int>(pick(1, std::max(1, max_agents)));
  for (int i = 0; i < n_agents; ++i) {
    AgentSpec a;
    a.address = "lp" + std::to_string(i);
    for (int j = 1; j < n_assets; ++j) {
      if (r.uniform() < 0.7) a.endowment[s.assets[static_cast<std::size_t>(j)].symbol] = Amount::from_double(uni(0.0, 2000.0));
    }
    a.deposit_rate = uni(0.05, 0.5);
    a.lock_cost = r.uniform() < 0.5 ? 0.0 : uni(0.0, 0.02);
    a.credit_use = uni(0.0, 1.0);
    s.agents.push_back(a);
  }
  if (r.uniform() < 0.3) s.demand_steps.push_back({pick(1, std::max<Epoch>(1, s.epochs)), uni(0.5, 3.0)});
  return s;
}

}  // namespace poel::sim
