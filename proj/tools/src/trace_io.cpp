#include "poel/cli/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <system_error>

namespace poel::cli {
namespace {

using ojson = nlohmann::ordered_json;

std::optional<double> parse_double(const std::string& cell) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::vector<std::string> trace_columns(const std::vector<std::string>& pools) {
  std::vector<std::string> c{"epoch"};
  for (const auto& p : pools) {
    for (const char* f : {"S_", "L_", "rho_", "E_", "Em_", "W_", "DR_", "I_"}) c.push_back(f + p);
  }
  for (const char* f : {"E", "E_m", "E_n", "E_target", "R", "RP", "SR", "w_nst", "m", "ceiling", "credit_budget", "V",
                        "basket_var", "kappa", "kappa_ok", "basket_return", "has_return", "wash", "ejections"}) {
    c.emplace_back(f);
  }
  return c;
}

std::size_t TraceTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw TraceParseError(1, "missing column '" + name + "'");
}

TraceTable trace_table(const sim::Trace& trace) {
  std::vector<std::string> pools;
  for (const auto& a : trace.scenario.assets) {
    if (!a.is_nst) pools.push_back(a.symbol);
  }
  TraceTable t;
  t.columns = trace_columns(pools);
  for (const auto& l : trace.ledgers) {
    std::vector<std::string> row{std::to_string(l.epoch)};
    for (const auto& p : pools) {
      const PoolState* pool = l.find_pool(p);
      row.push_back(pool ? pool->tokens.to_string() : "0");
      row.push_back(pool ? pool->loan.to_string() : "0");
      const auto q = l.quotes.find(p);
      row.push_back(q == l.quotes.end() ? "" : format_double(q->second.rho));
      row.push_back(pool && pool->has_efficiency ? format_double(pool->efficiency) : "");
      const auto s = l.pool_efficiency.find(p);
      row.push_back(s == l.pool_efficiency.end() || s->second.empty() ? "" : format_double(s->second.last_ma_m()));
      std::string w, dr, ir;
      for (std::size_t j = 0; j < l.plan.pools.size(); ++j) {
        if (l.plan.pools[j] != p) continue;
        w = format_double(l.plan.weights[j]);
        dr = l.plan.distributable[j].to_string();
        ir = format_double(l.plan.interest_rate[j]);
      }
      row.push_back(w);
      row.push_back(dr);
      row.push_back(ir);
    }
    const bool has_e = !l.cda_efficiency.empty();
    row.push_back(has_e ? format_double(l.cda_efficiency.raw.back()) : "");
    row.push_back(has_e ? format_double(l.cda_efficiency.last_ma_m()) : "");
    row.push_back(has_e ? format_double(l.cda_efficiency.last_ma_n()) : "");
    row.push_back(format_double(l.controller.target));
    row.push_back(l.plan.budget.to_string());
    row.push_back(l.reward_pool.to_string());
    row.push_back(l.staking_rewards.to_string());
    row.push_back(format_double(l.w_nst));
    row.push_back(format_double(l.multiplier));
    row.push_back(l.borrow_ceiling.to_string());
    row.push_back(l.credits.budget.to_string());
    row.push_back(format_double(l.risk.transactional_value));
    row.push_back(format_double(l.risk.basket_variance));
    row.push_back(format_double(l.risk.kappa_sum));
    row.push_back(l.risk.kappa_ok ? "1" : "0");
    row.push_back(format_double(l.risk.basket_return));
    row.push_back(l.risk.has_return ? "1" : "0");
    row.push_back(std::to_string(l.risk.wash_flags));
    row.push_back(std::to_string(l.risk.ejections));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const TraceTable& table, std::ostream& out) {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
}

void write_json(const TraceTable& table, std::ostream& out) {
  ojson rows = ojson::array();
  for (const auto& r : table.rows) {
    ojson obj = ojson::object();
    for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = r[i];
    rows.push_back(std::move(obj));
  }
  ojson doc;
  doc["columns"] = table.columns;
  doc["rows"] = std::move(rows);
  out << doc.dump(1) << '\n';
}

TraceTable read_csv(std::istream& in) {
  TraceTable t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      t.columns = split(line);
      if (t.columns.empty() || t.columns[0] != "epoch") throw TraceParseError(n, "header must start with 'epoch'");
      continue;
    }
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw TraceParseError(n, "expected " + std::to_string(t.columns.size()) + " fields, found " +
                                   std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!cells[i].empty() && !parse_double(cells[i])) {
        throw TraceParseError(n, "column '" + t.columns[i] + "': not a number: '" + cells[i] + "'");
      }
    }
    t.rows.push_back(std::move(cells));
  }
  if (n == 0) throw TraceParseError(1, "empty trace");
  return t;
}

TraceTable read_json(std::istream& in) {
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw TraceParseError(0, e.what());
  }
  TraceTable t;
  try {
    t.columns = doc.at("columns").get<std::vector<std::string>>();
    std::size_t i = 0;
    for (const auto& r : doc.at("rows")) {
      ++i;
      std::vector<std::string> cells;
      for (const auto& c : t.columns) {
        auto cell = r.at(c).get<std::string>();
        if (!cell.empty() && !parse_double(cell)) {
          throw TraceParseError(i, "column '" + c + "': not a number: '" + cell + "'");
        }
        cells.push_back(std::move(cell));
      }
      t.rows.push_back(std::move(cells));
    }
  } catch (const ojson::exception& e) {
    throw TraceParseError(0, std::string("malformed trace document: ") + e.what());
  }
  return t;
}

std::vector<risk::MetricsRow> metrics_rows(const TraceTable& table) {
  const std::size_t c_epoch = table.column("epoch");
  const std::size_t c_v = table.column("V");
  const std::size_t c_var = table.column("basket_var");
  const std::size_t c_kappa = table.column("kappa");
  const std::size_t c_kok = table.column("kappa_ok");
  const std::size_t c_ret = table.column("basket_return");
  const std::size_t c_hret = table.column("has_return");
  const std::size_t c_r = table.column("R");
  const std::size_t c_sr = table.column("SR");
  const std::size_t c_wash = table.column("wash");
  const std::size_t c_ej = table.column("ejections");

  std::vector<risk::MetricsRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t line = i + 2;
    auto num = [&](std::size_t c) {
      const auto v = parse_double(r[c]);
      if (!v) throw TraceParseError(line, "column '" + table.columns[c] + "': not a number: '" + r[c] + "'");
      return *v;
    };
    auto amount = [&](std::size_t c) {
      try {
        return Amount::parse(r[c]);
      } catch (const std::exception&) {
        throw TraceParseError(line, "column '" + table.columns[c] + "': not an amount: '" + r[c] + "'");
      }
    };
    auto flag = [&](std::size_t c) {
      if (r[c] != "0" && r[c] != "1") throw TraceParseError(line, "column '" + table.columns[c] + "': expected 0 or 1");
      return r[c] == "1";
    };
    risk::MetricsRow m;
    m.epoch = static_cast<Epoch>(num(c_epoch));
    m.transactional_value = num(c_v);
    m.basket_variance = num(c_var);
    m.kappa_sum = num(c_kappa);
    m.kappa_ok = flag(c_kok);
    m.basket_return = num(c_ret);
    m.has_return = flag(c_hret);
    m.rewards = amount(c_r);
    m.staking_rewards = amount(c_sr);
    m.wash_flags = static_cast<int>(num(c_wash));
    m.ejections = static_cast<int>(num(c_ej));
    rows.push_back(m);
  }
  return rows;
}

ojson report_json(const risk::MetricsReport& m) {
  ojson j;
  j["epochs"] = m.epochs;
  j["w1"] = m.w1;
  j["w2"] = m.w2;
  j["sum_value"] = m.sum_value;
  j["sum_variance"] = m.sum_variance;
  j["objective"] = m.objective;
  j["kappa_frequency"] = m.kappa_frequency;
  j["alpha"] = m.alpha;
  j["kappa_pass"] = m.kappa_pass;
  j["return_samples"] = m.return_samples;
  j["cvar"] = m.cvar ? ojson(*m.cvar) : ojson(nullptr);
  j["cvar_limit"] = m.cvar_limit;
  j["cvar_pass"] = m.cvar_pass;
  j["total_rewards"] = m.total_rewards.to_string();
  j["total_staking_rewards"] = m.total_staking_rewards.to_string();
  j["budget_ok"] = m.budget_ok;
  j["wash_flags"] = m.wash_flags;
  j["ejection_epochs"] = m.ejection_epochs;
  j["ejection_frequency"] = m.ejection_frequency;
  j["liveness_pass"] = m.liveness_pass;
  return j;
}

ojson summary_json(const sim::Trace& trace, const RunConfig& config, const risk::MetricsReport& report) {
  Amount sum_r;
  Amount sum_dr;
  Amount sum_ip;
  std::size_t stake_ratio_ok = 0;
  std::size_t ceiling_binding = 0;
  std::size_t curtailments = 0;
  std::size_t slashes = 0;
  ojson target_path = ojson::array();
  for (const auto& l : trace.ledgers) {
    sum_r += l.plan.budget;
    for (const auto& dr : l.plan.distributable) sum_dr += dr;
    for (const auto& ip : l.plan.interest_payable) sum_ip += ip;
    if (l.stake_ratio_ok) ++stake_ratio_ok;
    if (l.multiplier > 1.0) ++ceiling_binding;
    for (const auto& e : l.events) {
      if (e.kind == EventKind::Curtailment) ++curtailments;
      if (e.kind == EventKind::Slash) ++slashes;
    }
    target_path.push_back(l.controller.target);
  }
  const auto& last = trace.ledgers.back();
  const double n = static_cast<double>(trace.ledgers.size());

  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = config.scenario.seed;
  j["epochs"] = config.scenario.epochs;
  j["rows"] = trace.ledgers.size();
  j["metrics"] = report_json(report);
  j["sum_R"] = sum_r.to_string();
  j["sum_DR"] = sum_dr.to_string();
  j["sum_IP"] = sum_ip.to_string();
  j["sum_SR"] = last.cumulative_staking_rewards.to_string();
  j["final_reward_pool"] = last.reward_pool.to_string();
  j["final_target"] = last.controller.target;
  j["pass_rates"] = {{"kappa", report.kappa_frequency},
                     {"stake_ratio", static_cast<double>(stake_ratio_ok) / n},
                     {"ceiling_slack", 1.0 - static_cast<double>(ceiling_binding) / n}};
  j["events"] = {{"curtailments", curtailments}, {"slashes", slashes}};
  j["target_path"] = std::move(target_path);
  return j;
}

}  // namespace poel::cli
