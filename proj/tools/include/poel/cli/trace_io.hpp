#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poel/cli/config.hpp"
#include "poel/metrics.hpp"
#include "poel/sim.hpp"

namespace poel::cli {

/// Unreadable trace content; the message names the line.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Column names of the per-epoch export for the given collateral pools.
///
/// Fixed leading column `epoch`; per pool X: S_X, L_X, rho_X, E_X, Em_X,
/// W_X, DR_X, I_X; then E, E_m, E_n, E_target, R, RP, SR, w_nst, m,
/// ceiling, credit_budget, V, basket_var, kappa, kappa_ok, basket_return,
/// has_return, wash, ejections. Amounts are exact decimal strings, other
/// numbers shortest round-trip; empty cells mean "not defined this epoch".
std::vector<std::string> trace_columns(const std::vector<std::string>& pools);

/// Rows of string cells keyed by the column list.
struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;  // missing column: TraceParseError at line 1
};

TraceTable trace_table(const sim::Trace& trace);

void write_csv(const TraceTable& table, std::ostream& out);
void write_json(const TraceTable& table, std::ostream& out);
TraceTable read_csv(std::istream& in);
/// Errors carry the 1-based row number in place of a line number.
TraceTable read_json(std::istream& in);

/// Metrics rows rebuilt from the exported columns.
std::vector<risk::MetricsRow> metrics_rows(const TraceTable& table);

nlohmann::ordered_json summary_json(const sim::Trace& trace, const RunConfig& config,
                                    const risk::MetricsReport& report);
nlohmann::ordered_json report_json(const risk::MetricsReport& report);

std::string format_double(double value);

}  // namespace poel::cli
