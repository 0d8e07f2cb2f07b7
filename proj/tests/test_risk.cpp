#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "poel/error.hpp"
#include "poel/risk.hpp"

using namespace poel;
using namespace poel::risk;

TEST(Volatility, Examples) {
  EXPECT_NEAR(realized_volatility(std::vector<double>{0.01, -0.01}), 0.0141421, 1e-7);
  EXPECT_DOUBLE_EQ(realized_volatility(std::vector<double>{0.03, 0.03, 0.03}), 0.0);
  EXPECT_NEAR(realized_volatility(std::vector<double>{0.02, 0.0, -0.02}), 0.02, 1e-15);
  EXPECT_THROW((void)realized_volatility(std::vector<double>{0.01}), InsufficientData);
}

TEST(PortfolioVariance, Examples) {
  const std::vector<double> w{0.5, 0.5};
  const std::vector<double> s{0.2, 0.2};
  EXPECT_NEAR(portfolio_variance(w, s, Matrix::identity(2)), 0.02, 1e-15);
  EXPECT_NEAR(portfolio_variance(w, s, Matrix(2, 1.0)), 0.04, 1e-15);
  EXPECT_NEAR(portfolio_variance(std::vector<double>{1.0}, std::vector<double>{0.3}, Matrix::identity(1)), 0.09, 1e-15);
  EXPECT_THROW((void)portfolio_variance(w, std::vector<double>{0.2}, Matrix::identity(2)), InvalidArgument);
}

TEST(PortfolioVariance, IdentityCorrelationIsSumOfSquares) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(4), s(4);
    double expect = 0.0;
    for (int i = 0; i < 4; ++i) {
      w[i] = u(g);
      s[i] = u(g);
      expect += w[i] * w[i] * s[i] * s[i];
    }
    EXPECT_NEAR(portfolio_variance(w, s, Matrix::identity(4)), expect, 1e-14);
  }
}

TEST(Correlation, RejectsInvalidMatrices) {
  Matrix m = Matrix::identity(2);
  m(0, 1) = 0.5;
  EXPECT_THROW(validate_correlation(m), InvalidArgument);
  m(1, 0) = 0.5;
  EXPECT_NO_THROW(validate_correlation(m));
  m(0, 0) = 0.9;
  EXPECT_THROW(validate_correlation(m), InvalidArgument);
}

TEST(ExpectedShortfall, Examples) {
  EXPECT_NEAR(expected_shortfall(std::vector<double>{-0.10, -0.05, 0.00, 0.02}, 0.75), 0.10, 1e-15);
  EXPECT_LE(expected_shortfall(std::vector<double>{0.0, 0.01, 0.02, 0.03}, 0.75), 0.0);
  EXPECT_NEAR(expected_shortfall(std::vector<double>{-0.2, -0.1, 0, 0, 0, 0, 0, 0}, 0.75), 0.15, 1e-15);
}

TEST(ExpectedShortfall, NamesRequiredSampleCount) {
  try {
    (void)expected_shortfall(std::vector<double>{-0.1, 0.1}, 0.95);
    FAIL() << "expected InsufficientData";
  } catch (const InsufficientData& e) {
    EXPECT_NE(std::string(e.what()).find("20"), std::string::npos) << e.what();
  }
}

TEST(ExpectedShortfall, DominatesValueAtRiskAndMatchesSortingOracle) {
  std::mt19937_64 g(11);
  std::normal_distribution<double> n(0.0, 0.03);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xs(40 + t % 60);
    for (double& x : xs) x = n(g);
    EXPECT_GE(expected_shortfall(xs, 0.9) + 1e-15, value_at_risk(xs, 0.9));
    EXPECT_NEAR(expected_shortfall(xs, 0.9), oracle::shortfall(xs, 0.9), 1e-15);
  }
}

TEST(LiquidityRisk, Examples) {
  EXPECT_DOUBLE_EQ(liquidity_risk(0.02, 10000, 0, 1.0), 0.01);
  EXPECT_DOUBLE_EQ(liquidity_risk(0.02, 10000, 100, 1.0), 0.02);
  const double a = liquidity_risk(0.0, 10000, 100, 1.0);
  const double b = liquidity_risk(0.0, 20000, 100, 1.0);
  EXPECT_DOUBLE_EQ(b, a / 2.0);
  EXPECT_TRUE(std::isinf(liquidity_risk(0.02, 0, 100, 1.0)));
}

TEST(WashTrades, Examples) {
  const std::vector<Trade> exact{{0, 10, 100}, {1, -10, 100.0}};
  EXPECT_EQ(detect_wash_trades(exact, 0.01, 8).size(), 1u);
  const std::vector<Trade> mismatched{{0, 10, 100}, {1, -5, 100}};
  EXPECT_TRUE(detect_wash_trades(mismatched, 0.01, 8).empty());
  const std::vector<Trade> moved{{0, 10, 100}, {1, -10, 103}};
  EXPECT_TRUE(detect_wash_trades(moved, 0.5, 8).empty());
  const std::vector<Trade> same_side{{0, 10, 100}, {1, 10, 100}};
  EXPECT_TRUE(detect_wash_trades(same_side, 0.5, 8).empty());
}

TEST(WashTrades, UnrelatedTradesDoNotMaskThePattern) {
  const std::vector<Trade> tape{{0, 3, 99}, {2, 7, 101}, {5, 10, 100}, {6, -10, 100}, {9, -1, 98}};
  const auto flags = detect_wash_trades(tape, 0.01, 8);
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].first, 2u);
  EXPECT_EQ(flags[0].second, 3u);
}

namespace {

WeightProblem problem_of(std::vector<double> vols, Matrix corr) {
  WeightProblem p;
  for (std::size_t i = 0; i < vols.size(); ++i) p.assets.push_back(i == 0 ? "NST" : "A" + std::to_string(i));
  p.vols = std::move(vols);
  p.correlations = std::move(corr);
  return p;
}

}  // namespace

TEST(TargetWeights, SoleStakingTokenTakesEverything) {
  const auto tw = target_weights(problem_of({0.3}, Matrix::identity(1)), ProtocolParams{});
  ASSERT_EQ(tw.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(tw.weights[0], 1.0);
}

TEST(TargetWeights, FloorBindsOnTheStakingToken) {
  ProtocolParams p;
  p.w_nst_target = 0.5;
  p.sigma_ceiling = 1.0;
  const auto tw = target_weights(problem_of({0.3, 0.1}, Matrix::identity(2)), p);
  EXPECT_NEAR(tw.weight_of("NST"), 0.5, 1e-9);
  EXPECT_NEAR(tw.weight_of("A1"), 0.5, 1e-9);
}

TEST(TargetWeights, VolatilityCeilingZeroesAsset) {
  ProtocolParams p;
  p.w_nst_target = 0.3;
  p.sigma_ceiling = 0.5;
  const auto tw = target_weights(problem_of({0.4, 0.9, 0.2}, Matrix::identity(3)), p);
  EXPECT_EQ(tw.weight_of("A1"), 0.0);
  ASSERT_EQ(tw.filtered.size(), 1u);
  EXPECT_EQ(tw.filtered[0], "A1");
  double total = 0.0;
  for (double w : tw.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(TargetWeights, UnattainableShortfallIsInfeasible) {
  ProtocolParams p;
  p.w_nst_target = 0.5;
  p.ci = 0.9;
  p.es_limit = 0.001;
  auto prob = problem_of({0.05, 0.05}, Matrix::identity(2));
  prob.returns = {std::vector<double>(20, -0.05), std::vector<double>(20, -0.05)};
  EXPECT_THROW((void)target_weights(prob, p), Infeasible);
}
