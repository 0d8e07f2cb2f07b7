#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poel/cli/commands.hpp"
#include "poel/cli/config.hpp"
#include "poel/cli/trace_io.hpp"

namespace fs = std::filesystem;
using namespace poel;
using namespace poel::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("poel_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

fs::path sample() { return fs::path(POEL_SOURCE_DIR) / "configs" / "sample.json"; }

RunConfig small_config() {
  RunConfig c = load_config(sample());
  c.scenario.epochs = 25;
  return c;
}

}  // namespace

TEST(Config, RoundTripIsIdentity) {
  const auto c = load_config(sample());
  const auto text = serialize_config(c);
  const auto again = parse_config(text);
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize_config(again), text);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunConfig r;
    r.scenario = sim::random_scenario(seed);
    EXPECT_EQ(parse_config(serialize_config(r)), r) << "seed " << seed;
  }
}

TEST(Config, AmountsAreDecimalStrings) {
  const auto j = to_json(load_config(sample()));
  EXPECT_TRUE(j["validators"][0]["direct_stake"].is_string());
  EXPECT_TRUE(j["params"]["r_min"].is_string());
}

TEST(Config, UnknownKeysAndBadTypesCarryPaths) {
  auto j = nlohmann::json::parse(slurp(sample()));
  j["params"]["not_a_param"] = 1;
  j["assets"][1]["vol"] = "high";
  try {
    (void)from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    std::vector<std::string> fields;
    for (const auto& p : e.problems()) fields.push_back(p.field);
    EXPECT_NE(std::find(fields.begin(), fields.end(), "params.not_a_param"), fields.end());
    EXPECT_NE(std::find(fields.begin(), fields.end(), "assets[1].vol"), fields.end());
  }
}

TEST(Validate, SampleIsValid) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(sample(), out, err), kOk) << err.str();
}

TEST(Validate, EvenExponentIsReportedWithItsPath) {
  const auto dir = scratch("even_c");
  auto j = nlohmann::json::parse(slurp(sample()));
  j["params"]["c"] = 2;
  j["params"]["n_win"] = 3;
  j["params"]["m_win"] = 5;
  spit(dir / "bad.json", j.dump());
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(dir / "bad.json", out, err), kConfigError);
  EXPECT_NE(err.str().find("params.c: c must be odd"), std::string::npos) << err.str();
  EXPECT_NE(err.str().find("params.n_win"), std::string::npos) << err.str();
}

TEST(Validate, MissingFileIsAnIoError) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate("/nonexistent/poel.json", out, err), kIoError);
}

TEST(Validate, MalformedJsonIsAConfigError) {
  const auto dir = scratch("malformed");
  spit(dir / "bad.json", "{\"schema_version\": 1,");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(dir / "bad.json", out, err), kConfigError);
}

TEST(Run, WritesTraceAndSummaryWithOneRowPerEpoch) {
  const auto dir = scratch("run");
  spit(dir / "config.json", serialize_config(small_config()));
  RunOptions opt;
  opt.config = dir / "config.json";
  opt.out = dir / "out";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();
  std::ifstream csv(opt.out / "trace.csv");
  const auto table = read_csv(csv);
  EXPECT_EQ(table.rows.size(), 26u);
  EXPECT_TRUE(fs::exists(opt.out / "summary.json"));

  const auto summary = nlohmann::json::parse(slurp(opt.out / "summary.json"));
  const auto sum_r = Amount::parse(summary["sum_R"].get<std::string>());
  const auto sum_dr = Amount::parse(summary["sum_DR"].get<std::string>());
  EXPECT_NEAR(sum_r.to_double(), sum_dr.to_double(), 1e-9);

  double column_r = 0.0;
  const auto c = table.column("R");
  for (const auto& row : table.rows) column_r += std::stod(row[c]);
  EXPECT_NEAR(column_r, sum_dr.to_double(), 1e-9);
}

TEST(Run, OverridesApply) {
  const auto dir = scratch("override");
  RunOptions opt;
  opt.config = sample();
  opt.out = dir;
  opt.epochs = 7;
  opt.seed = 5;
  opt.format = "json";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();
  std::ifstream js(dir / "trace.json");
  EXPECT_EQ(read_json(js).rows.size(), 8u);
  const auto echoed = load_config(dir / "config.json");
  EXPECT_EQ(echoed.scenario.seed, 5u);
  EXPECT_EQ(echoed.scenario.epochs, 7);
}

TEST(Run, SameSeedSameBytes) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    RunOptions opt;
    opt.config = sample();
    opt.out = dir;
    opt.epochs = 40;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();
  }
  EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
}

TEST(Run, InvalidConfigIsExitOne) {
  const auto dir = scratch("run_bad");
  auto c = small_config();
  c.scenario.params.chi = 0.5;
  spit(dir / "config.json", serialize_config(c));
  RunOptions opt;
  opt.config = dir / "config.json";
  opt.out = dir / "out";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(opt, out, err), kConfigError);
  EXPECT_FALSE(fs::exists(dir / "out" / "trace.csv"));
}

TEST(Report, RecomputationMatchesSummary) {
  const auto dir = scratch("report");
  RunOptions opt;
  opt.config = sample();
  opt.out = dir;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();
  std::ostringstream rep, rep_err;
  EXPECT_EQ(cmd_report(dir, "json", rep, rep_err), kOk) << rep_err.str();
  const auto j = nlohmann::json::parse(rep.str());
  EXPECT_TRUE(j["consistent_with_summary"].get<bool>());
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(j["metrics"], summary["metrics"]);
  EXPECT_EQ(j["target_path"].size(), 121u);

  std::ostringstream text, text_err;
  EXPECT_EQ(cmd_report(dir, "text", text, text_err), kOk);
  EXPECT_NE(text.str().find("objective"), std::string::npos);
  EXPECT_NE(text.str().find("wash flags"), std::string::npos);
}

TEST(Report, ZeroActivityTraceReportsZeros) {
  const auto dir = scratch("idle");
  auto c = small_config();
  c.scenario.agents.clear();
  spit(dir / "config.json", serialize_config(c));
  RunOptions opt;
  opt.config = dir / "config.json";
  opt.out = dir / "out";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();
  std::ostringstream rep, rep_err;
  ASSERT_EQ(cmd_report(opt.out, "json", rep, rep_err), kOk) << rep_err.str();
  const auto m = nlohmann::json::parse(rep.str())["metrics"];
  EXPECT_EQ(m["objective"].get<double>(), 0.0);
  EXPECT_EQ(m["sum_value"].get<double>(), 0.0);
  EXPECT_EQ(m["sum_variance"].get<double>(), 0.0);
  EXPECT_EQ(m["total_rewards"].get<std::string>(), "0");
}

TEST(Report, CorruptCsvNamesTheLine) {
  const auto dir = scratch("corrupt");
  RunOptions opt;
  opt.config = sample();
  opt.out = dir;
  opt.epochs = 10;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opt, out, err), kOk) << err.str();

  const std::string clean = slurp(dir / "trace.csv");
  std::istringstream lines(clean);
  std::string line, patched;
  for (int n = 1; std::getline(lines, line); ++n) {
    if (n == 5) line = line.substr(0, line.find(',')) + ",oops" + line.substr(line.find(',', line.find(',') + 1));
    patched += line + "\n";
  }
  spit(dir / "trace.csv", patched);
  std::ostringstream rep, rep_err;
  EXPECT_EQ(cmd_report(dir, "text", rep, rep_err), kIoError);
  EXPECT_NE(rep_err.str().find("line 5"), std::string::npos) << rep_err.str();

  spit(dir / "trace.csv", clean + "1,2,3\n");
  std::ostringstream rep2, rep2_err;
  EXPECT_EQ(cmd_report(dir, "text", rep2, rep2_err), kIoError);
  EXPECT_NE(rep2_err.str().find("line 13"), std::string::npos) << rep2_err.str();
}

TEST(Report, MissingTraceIsAnIoError) {
  const auto dir = scratch("empty_dir");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_report(dir, "text", out, err), kIoError);
}
