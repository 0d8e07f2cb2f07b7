#include "poel/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace poel::cli {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string summarize(const std::vector<ParamViolation>& problems) {
  std::string out = "invalid configuration";
  for (const auto& p : problems) out += "\n  " + p.field + ": " + p.message;
  return out;
}

/// Collects type errors with paths instead of stopping at the first one.
class Reader {
 public:
  std::vector<ParamViolation> problems;

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!ok.contains(key)) problems.push_back({join(path, key), "unknown key"});
    }
  }

  bool object(const json& parent, const char* key, const std::string& path) {
    if (!parent.contains(key)) return false;
    if (!parent.at(key).is_object()) {
      problems.push_back({join(path, key), "expected an object"});
      return false;
    }
    return true;
  }

  bool array(const json& parent, const char* key, const std::string& path) {
    if (!parent.contains(key)) return false;
    if (!parent.at(key).is_array()) {
      problems.push_back({join(path, key), "expected an array"});
      return false;
    }
    return true;
  }

  void read(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      problems.push_back({join(path, key), "expected a number"});
      return;
    }
    out = v.get<double>();
  }

  void read(const json& obj, const char* key, const std::string& path, int& out) {
    std::int64_t wide = out;
    read(obj, key, path, wide);
    if (wide < INT32_MIN || wide > INT32_MAX) {
      problems.push_back({join(path, key), "integer out of range"});
      return;
    }
    out = static_cast<int>(wide);
  }

  void read(const json& obj, const char* key, const std::string& path, std::int64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      problems.push_back({join(path, key), "expected an integer"});
      return;
    }
    out = v.get<std::int64_t>();
  }

  void read(const json& obj, const char* key, const std::string& path, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      problems.push_back({join(path, key), "expected an unsigned integer"});
      return;
    }
    out = v.get<std::uint64_t>();
  }

  void read(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
      problems.push_back({join(path, key), "expected true or false"});
      return;
    }
    out = v.get<bool>();
  }

  void read(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      problems.push_back({join(path, key), "expected a string"});
      return;
    }
    out = v.get<std::string>();
  }

  void read(const json& obj, const char* key, const std::string& path, Amount& out) {
    if (!obj.contains(key)) return;
    amount(obj.at(key), join(path, key), out);
  }

  void amount(const json& v, const std::string& path, Amount& out) {
    if (!v.is_string()) {
      problems.push_back({path, "expected a decimal string"});
      return;
    }
    try {
      out = Amount::parse(v.get<std::string>());
    } catch (const std::exception& e) {
      problems.push_back({path, e.what()});
    }
  }

  void read(const json& obj, const char* key, const std::string& path, std::map<std::string, double>& out) {
    if (!object(obj, key, path)) return;
    out.clear();
    for (const auto& [k, v] : obj.at(key).items()) {
      if (!v.is_number()) {
        problems.push_back({join(join(path, key), k), "expected a number"});
        continue;
      }
      out[k] = v.get<double>();
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

template <class P, class F>
void visit_params(P& p, F&& f) {
  f("rho_min", p.rho_min);
  f("eta", p.eta);
  f("eta_by_asset", p.eta_by_asset);
  f("chi", p.chi);
  f("b", p.b);
  f("w_nst_target", p.w_nst_target);
  f("t_ratio", p.t_ratio);
  f("extension_interval", p.extension_interval);
  f("srr", p.srr);
  f("accrual_epochs", p.accrual_epochs);
  f("zeta", p.zeta);
  f("theta", p.theta);
  f("c", p.c);
  f("r_min", p.r_min);
  f("initial_target_eff", p.initial_target_eff);
  f("upsilon", p.upsilon);
  f("psi", p.psi);
  f("q1", p.q1);
  f("q2", p.q2);
  f("b_lower", p.b_lower);
  f("m_win", p.m_win);
  f("n_win", p.n_win);
  f("w_floor", p.w_floor);
  f("g_factor", p.g_factor);
  f("kappa_w", p.kappa_w);
  f("k", p.k);
  f("nu", p.nu);
  f("e_mid", p.e_mid);
  f("tenure_min_fraction", p.tenure_min_fraction);
  f("varpi", p.varpi);
  f("unstake_epochs", p.unstake_epochs);
  f("liveness_factor", p.liveness_factor);
  f("sigma_ceiling", p.sigma_ceiling);
  f("es_limit", p.es_limit);
  f("ci", p.ci);
  f("risk_lookback", p.risk_lookback);
  f("reweight_interval", p.reweight_interval);
  f("min_liquidity", p.min_liquidity);
  f("qualification_lookback", p.qualification_lookback);
  f("wash_price_tol", p.wash_price_tol);
  f("impact_coeff", p.impact_coeff);
  f("alpha", p.alpha);
  f("kappa_limit", p.kappa_limit);
  f("cvar_limit", p.cvar_limit);
  f("lambda_ol", p.lambda_ol);
  f("gamma_default", p.gamma_default);
  f("gamma_by_asset", p.gamma_by_asset);
  f("round_len", p.round_len);
  f("credit_budget_initial", p.credit_budget_initial);
  f("credit_budget_decay", p.credit_budget_decay);
}

struct ParamWriter {
  ojson& out;
  void operator()(const char* key, const Amount& v) { out[key] = v.to_string(); }
  void operator()(const char* key, const std::map<std::string, double>& v) {
    ojson m = ojson::object();
    for (const auto& [k, x] : v) m[k] = x;
    out[key] = std::move(m);
  }
  template <class T>
  void operator()(const char* key, const T& v) {
    out[key] = v;
  }
};

ProtocolParams read_params(Reader& r, const json& j, const std::string& path) {
  ProtocolParams p;
  if (!j.is_object()) {
    r.problems.push_back({path, "expected an object"});
    return p;
  }
  std::set<std::string> known;
  visit_params(p, [&](const char* key, auto& field) {
    known.insert(key);
    r.read(j, key, path, field);
  });
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) r.problems.push_back({Reader::join(path, key), "unknown key"});
  }
  return p;
}

}  // namespace

ConfigError::ConfigError(std::vector<ParamViolation> problems)
    : std::runtime_error(summarize(problems)), problems_(std::move(problems)) {}

ojson params_to_json(const ProtocolParams& params) {
  ojson out = ojson::object();
  visit_params(params, ParamWriter{out});
  return out;
}

ProtocolParams params_from_json(const json& j) {
  Reader r;
  auto p = read_params(r, j, "params");
  if (!r.problems.empty()) throw ConfigError(r.problems);
  return p;
}

ojson to_json(const RunConfig& config) {
  const auto& s = config.scenario;
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = s.seed;
  j["epochs"] = s.epochs;
  j["warmup"] = s.warmup;
  j["steps_per_epoch"] = s.steps_per_epoch;
  j["objective"] = {{"w1", config.w1}, {"w2", config.w2}};
  j["params"] = params_to_json(s.params);

  ojson assets = ojson::array();
  for (const auto& a : s.assets) {
    assets.push_back({{"symbol", a.symbol},
                      {"is_nst", a.is_nst},
                      {"initial_price", a.initial_price},
                      {"vol", a.vol},
                      {"drift", a.drift},
                      {"spread", a.spread},
                      {"fee_rate", a.fee_rate},
                      {"demand", a.demand},
                      {"demand_vol", a.demand_vol},
                      {"trade_volume", a.trade_volume},
                      {"wash_rate", a.wash_rate}});
  }
  j["assets"] = std::move(assets);

  ojson validators = ojson::array();
  for (const auto& v : s.validators) {
    validators.push_back({{"id", v.id},
                          {"direct_stake", v.direct_stake.to_string()},
                          {"min_stake_req", v.min_stake_req.to_string()},
                          {"fault_prob", v.fault_prob}});
  }
  j["validators"] = std::move(validators);

  ojson agents = ojson::array();
  for (const auto& a : s.agents) {
    ojson endow = ojson::object();
    for (const auto& [sym, amt] : a.endowment) endow[sym] = amt.to_string();
    agents.push_back({{"address", a.address},
                      {"endowment", std::move(endow)},
                      {"deposit_rate", a.deposit_rate},
                      {"lock_menu", a.lock_menu},
                      {"lock_cost", a.lock_cost},
                      {"credit_use", a.credit_use}});
  }
  j["agents"] = std::move(agents);

  ojson steps = ojson::array();
  for (const auto& d : s.demand_steps) steps.push_back({{"epoch", d.epoch}, {"factor", d.factor}});
  j["demand_steps"] = std::move(steps);
  return j;
}

RunConfig from_json(const json& j) {
  Reader r;
  RunConfig c;
  auto& s = c.scenario;
  if (!j.is_object()) throw ConfigError(std::vector<ParamViolation>{{"", "config must be a JSON object"}});
  r.keys(j, "", {"schema_version", "seed", "epochs", "warmup", "steps_per_epoch", "objective", "params", "assets",
                 "validators", "agents", "demand_steps"});

  if (!j.contains("schema_version")) {
    r.problems.push_back({"schema_version", "missing"});
  } else if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    r.problems.push_back({"schema_version", "unsupported schema version (expected 1)"});
  }
  r.read(j, "seed", "", s.seed);
  r.read(j, "epochs", "", s.epochs);
  r.read(j, "warmup", "", s.warmup);
  r.read(j, "steps_per_epoch", "", s.steps_per_epoch);
  if (r.object(j, "objective", "")) {
    const auto& o = j.at("objective");
    r.keys(o, "objective", {"w1", "w2"});
    r.read(o, "w1", "objective", c.w1);
    r.read(o, "w2", "objective", c.w2);
  }
  if (j.contains("params")) s.params = read_params(r, j.at("params"), "params");

  if (r.array(j, "assets", "")) {
    const auto& arr = j.at("assets");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "assets[" + std::to_string(i) + "]";
      const auto& o = arr[i];
      if (!o.is_object()) {
        r.problems.push_back({path, "expected an object"});
        continue;
      }
      r.keys(o, path, {"symbol", "is_nst", "initial_price", "vol", "drift", "spread", "fee_rate", "demand",
                       "demand_vol", "trade_volume", "wash_rate"});
      sim::AssetSpec a;
      r.read(o, "symbol", path, a.symbol);
      r.read(o, "is_nst", path, a.is_nst);
      r.read(o, "initial_price", path, a.initial_price);
      r.read(o, "vol", path, a.vol);
      r.read(o, "drift", path, a.drift);
      r.read(o, "spread", path, a.spread);
      r.read(o, "fee_rate", path, a.fee_rate);
      r.read(o, "demand", path, a.demand);
      r.read(o, "demand_vol", path, a.demand_vol);
      r.read(o, "trade_volume", path, a.trade_volume);
      r.read(o, "wash_rate", path, a.wash_rate);
      s.assets.push_back(a);
    }
  }

  if (r.array(j, "validators", "")) {
    const auto& arr = j.at("validators");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "validators[" + std::to_string(i) + "]";
      const auto& o = arr[i];
      if (!o.is_object()) {
        r.problems.push_back({path, "expected an object"});
        continue;
      }
      r.keys(o, path, {"id", "direct_stake", "min_stake_req", "fault_prob"});
      sim::ValidatorSpec v;
      r.read(o, "id", path, v.id);
      r.read(o, "direct_stake", path, v.direct_stake);
      r.read(o, "min_stake_req", path, v.min_stake_req);
      r.read(o, "fault_prob", path, v.fault_prob);
      s.validators.push_back(v);
    }
  }

  if (r.array(j, "agents", "")) {
    const auto& arr = j.at("agents");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "agents[" + std::to_string(i) + "]";
      const auto& o = arr[i];
      if (!o.is_object()) {
        r.problems.push_back({path, "expected an object"});
        continue;
      }
      r.keys(o, path, {"address", "endowment", "deposit_rate", "lock_menu", "lock_cost", "credit_use"});
      sim::AgentSpec a;
      r.read(o, "address", path, a.address);
      if (r.object(o, "endowment", path)) {
        for (const auto& [sym, v] : o.at("endowment").items()) r.amount(v, path + ".endowment." + sym, a.endowment[sym]);
      }
      r.read(o, "deposit_rate", path, a.deposit_rate);
      if (r.array(o, "lock_menu", path)) {
        a.lock_menu.clear();
        for (const auto& v : o.at("lock_menu")) {
          if (!v.is_number_integer()) {
            r.problems.push_back({path + ".lock_menu", "expected integers"});
            continue;
          }
          a.lock_menu.push_back(v.get<Epoch>());
        }
      }
      r.read(o, "lock_cost", path, a.lock_cost);
      r.read(o, "credit_use", path, a.credit_use);
      s.agents.push_back(a);
    }
  }

  if (r.array(j, "demand_steps", "")) {
    const auto& arr = j.at("demand_steps");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "demand_steps[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) {
        r.problems.push_back({path, "expected an object"});
        continue;
      }
      r.keys(arr[i], path, {"epoch", "factor"});
      sim::DemandStep d;
      r.read(arr[i], "epoch", path, d.epoch);
      r.read(arr[i], "factor", path, d.factor);
      s.demand_steps.push_back(d);
    }
  }

  if (!r.problems.empty()) throw ConfigError(r.problems);
  return c;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<ParamViolation>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  return from_json(j);
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<ParamViolation> check_config(const RunConfig& config) {
  auto out = sim::validate(config.scenario);
  if (!(config.w1 >= 0.0 && config.w2 >= 0.0) || std::fabs(config.w1 + config.w2 - 1.0) > 1e-12) {
    out.push_back({"objective", "w1 and w2 must be non-negative and sum to 1"});
  }
  for (std::size_t i = 0; i < config.scenario.assets.size(); ++i) {
    const auto& sym = config.scenario.assets[i].symbol;
    if (sym.find_first_of(",\"\n\r ") != std::string::npos) {
      out.push_back({"assets[" + std::to_string(i) + "].symbol", "symbol must not contain commas, quotes or spaces"});
    }
  }
  return out;
}

}  // namespace poel::cli
