#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poel/sim.hpp"

namespace poel::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed or invalid configuration; every problem carries a field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ParamViolation> problems);
  [[nodiscard]] const std::vector<ParamViolation>& problems() const { return problems_; }

 private:
  std::vector<ParamViolation> problems_;
};

/// File or stream failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario plus the objective weights used by the report.
struct RunConfig {
  sim::Scenario scenario;
  double w1 = 0.5;
  double w2 = 0.5;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::ordered_json params_to_json(const ProtocolParams& params);
ProtocolParams params_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const RunConfig& config);
/// Parses and type-checks a config document. Throws ConfigError listing
/// unknown keys, type mismatches and a schema version other than 1; does
/// not check the scenario invariants (see check_config).
RunConfig from_json(const nlohmann::json& j);

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);
/// Reads a config file; IoError when unreadable, ConfigError when malformed.
RunConfig load_config(const std::filesystem::path& path);

/// Scenario and parameter invariant violations plus objective weight checks.
std::vector<ParamViolation> check_config(const RunConfig& config);

}  // namespace poel::cli
