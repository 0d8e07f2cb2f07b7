#include <iostream>

#include <CLI11.hpp>

#include "poel/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PoEL protocol engine and scenario simulator"};
  app.require_subcommand(1);

  std::string config;
  auto* validate = app.add_subcommand("validate", "check a scenario config");
  validate->add_option("--config,config", config, "scenario config (JSON)")->required();

  poel::cli::RunOptions run_opts;
  std::uint64_t seed = 0;
  std::int64_t epochs = 0;
  auto* run = app.add_subcommand("run", "run a scenario and export its trace");
  run->add_option("--config", run_opts.config, "scenario config (JSON)")->required();
  run->add_option("--out", run_opts.out, "output directory")->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  auto* epochs_opt = run->add_option("--epochs", epochs, "override the number of epochs")->check(CLI::NonNegativeNumber);
  run->add_option("--format", run_opts.format, "trace format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  std::string report_dir = "out";
  std::string report_format = "text";
  auto* report = app.add_subcommand("report", "summarise an exported trace");
  report->add_option("--out,dir", report_dir, "directory written by 'run'")->capture_default_str();
  report->add_option("--format", report_format, "report format")->check(CLI::IsMember({"text", "json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : poel::cli::kConfigError;
  }

  if (*validate) return poel::cli::cmd_validate(config, std::cout, std::cerr);
  if (*run) {
    if (*seed_opt) run_opts.seed = seed;
    if (*epochs_opt) run_opts.epochs = epochs;
    return poel::cli::cmd_run(run_opts, std::cout, std::cerr);
  }
  return poel::cli::cmd_report(report_dir, report_format, std::cout, std::cerr);
}
