#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace poel::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kEngineError = 2, kIoError = 3 };

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> epochs;
  std::string format = "csv";  // trace export: csv or json
};

/// Prints every violation with its field path; 0 iff the config is valid.
int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Runs the scenario and writes trace.{csv,json}, summary.json and the
/// resolved config.json into the output directory.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Recomputes the metrics from an exported trace, prints them (text, or
/// JSON with format "json") and checks them against summary.json.
int cmd_report(const std::filesystem::path& dir, const std::string& format, std::ostream& out, std::ostream& err);

}  // namespace poel::cli
