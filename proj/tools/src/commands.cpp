#include "poel/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <fstream>
#include <ostream>

#include "poel/cli/config.hpp"
#include "poel/cli/trace_io.hpp"
#include "poel/error.hpp"
#include "poel/metrics.hpp"

namespace poel::cli {
namespace fs = std::filesystem;
namespace {

void print_problems(const std::vector<ParamViolation>& problems, std::ostream& err) {
  for (const auto& p : problems) err << "error: " << (p.field.empty() ? "<root>" : p.field) << ": " << p.message << '\n';
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
  try {
    const auto problems = check_config(load_config(config));
    if (!problems.empty()) {
      print_problems(problems, err);
      return kConfigError;
    }
    out << config.string() << ": ok\n";
    return kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConfigError& e) {
    print_problems(e.problems(), err);
    return kConfigError;
  }
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  if (options.format != "csv" && options.format != "json") {
    err << "error: --format must be csv or json\n";
    return kConfigError;
  }
  RunConfig config;
  try {
    config = load_config(options.config);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConfigError& e) {
    print_problems(e.problems(), err);
    return kConfigError;
  }
  if (options.seed) config.scenario.seed = *options.seed;
  if (options.epochs) config.scenario.epochs = *options.epochs;
  if (const auto problems = check_config(config); !problems.empty()) {
    print_problems(problems, err);
    return kConfigError;
  }

  sim::Trace trace;
  risk::MetricsReport report;
  try {
    trace = sim::run(config.scenario);
    report = risk::objective_metrics(trace.ledgers, config.w1, config.w2, config.scenario.params);
  } catch (const Error& e) {
    err << "engine error: " << e.what() << '\n';
    return kEngineError;
  }

  try {
    std::error_code ec;
    fs::create_directories(options.out, ec);
    if (ec) throw IoError("cannot create '" + options.out.string() + "': " + ec.message());
    const auto table = trace_table(trace);
    std::ostringstream body;
    if (options.format == "csv") {
      write_csv(table, body);
    } else {
      write_json(table, body);
    }
    const fs::path trace_path = options.out / ("trace." + options.format);
    write_file(trace_path, body.str());
    write_file(options.out / "summary.json", summary_json(trace, config, report).dump(2) + "\n");
    write_file(options.out / "config.json", serialize_config(config));
    out << "wrote " << trace_path.string() << " (" << table.rows.size() << " rows) and "
        << (options.out / "summary.json").string() << '\n';
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

int cmd_report(const fs::path& dir, const std::string& format, std::ostream& out, std::ostream& err) {
  RunConfig config;
  TraceTable table;
  nlohmann::json summary;
  try {
    config = parse_config(read_file(dir / "config.json"));
    const fs::path csv = dir / "trace.csv";
    const fs::path js = dir / "trace.json";
    if (fs::exists(csv)) {
      std::ifstream in(csv, std::ios::binary);
      if (!in) throw IoError("cannot read '" + csv.string() + "'");
      table = read_csv(in);
    } else if (fs::exists(js)) {
      std::ifstream in(js, std::ios::binary);
      if (!in) throw IoError("cannot read '" + js.string() + "'");
      table = read_json(in);
    } else {
      throw IoError("no trace.csv or trace.json in '" + dir.string() + "'");
    }
    summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const TraceParseError& e) {
    err << "error: corrupt trace: " << e.what() << '\n';
    return kIoError;
  } catch (const ConfigError& e) {
    print_problems(e.problems(), err);
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: corrupt summary.json: " << e.what() << '\n';
    return kIoError;
  }

  risk::MetricsReport m;
  std::vector<double> targets;
  try {
    const auto rows = metrics_rows(table);
    if (rows.empty()) throw TraceParseError(2, "trace has no rows");
    m = risk::objective_metrics(rows, config.w1, config.w2, config.scenario.params);
    const std::size_t c_target = table.column("E_target");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      double v = 0.0;
      const auto& cell = table.rows[i][c_target];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw TraceParseError(i + 2, "column 'E_target': not a number: '" + cell + "'");
      }
      targets.push_back(v);
    }
  } catch (const TraceParseError& e) {
    err << "error: corrupt trace: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kEngineError;
  }

  const auto recomputed = nlohmann::json::parse(report_json(m).dump());
  const bool consistent = summary.contains("metrics") && summary["metrics"] == recomputed;

  if (format == "json") {
    nlohmann::ordered_json j;
    j["metrics"] = report_json(m);
    j["target_path"] = targets;
    j["consistent_with_summary"] = consistent;
    out << j.dump(2) << '\n';
  } else {
    out << "epochs                 " << m.epochs << '\n'
        << "objective              " << format_double(m.objective) << "  (w1=" << format_double(m.w1)
        << ", w2=" << format_double(m.w2) << ")\n"
        << "  sum transactional V  " << format_double(m.sum_value) << '\n'
        << "  sum basket variance  " << format_double(m.sum_variance) << '\n'
        << "risk bound frequency   " << format_double(m.kappa_frequency) << " vs alpha " << format_double(m.alpha)
        << (m.kappa_pass ? "  pass" : "  FAIL") << '\n'
        << "cVaR(0.99)             "
        << (m.cvar ? format_double(*m.cvar) + " vs limit " + format_double(m.cvar_limit) + (m.cvar_pass ? "  pass" : "  FAIL")
                   : "n/a (" + std::to_string(m.return_samples) + " return samples, 100 needed)")
        << '\n'
        << "incentives             " << m.total_rewards.to_string() << " of " << m.total_staking_rewards.to_string()
        << (m.budget_ok ? "  within budget" : "  OVER BUDGET") << '\n'
        << "wash flags             " << m.wash_flags << '\n'
        << "ejection epochs        " << m.ejection_epochs << " (" << format_double(m.ejection_frequency)
        << (m.liveness_pass ? ")  pass" : ")  FAIL") << '\n';
    if (!targets.empty()) {
      out << "target efficiency      start " << format_double(targets.front()) << ", min "
          << format_double(*std::min_element(targets.begin(), targets.end())) << ", max "
          << format_double(*std::max_element(targets.begin(), targets.end())) << ", end "
          << format_double(targets.back()) << '\n';
      const std::size_t stride = std::max<std::size_t>(1, targets.size() / 10);
      out << "  path";
      for (std::size_t i = 0; i < targets.size(); i += stride) out << ' ' << format_double(targets[i]);
      out << '\n';
    }
    out << "summary check          " << (consistent ? "matches summary.json" : "MISMATCH with summary.json") << '\n';
  }
  if (!consistent) {
    err << "error: recomputed metrics differ from summary.json\n";
    return kEngineError;
  }
  return kOk;
}

}  // namespace poel::cli
