#include <gtest/gtest.h>

#include <vector>

#include "poel/credits.hpp"
#include "poel/error.hpp"

using namespace poel;
using namespace poel::credits;

TEST(AssetCap, Examples) {
  EXPECT_EQ(asset_cap(Amount::from_int(1000), 2.0, 0.05), Amount::from_int(100));
  EXPECT_TRUE(asset_cap(Amount::from_int(1000), 2.0, 0.0).is_zero());
  EXPECT_TRUE(asset_cap(Amount{}, 2.0, 0.05).is_zero());
  EXPECT_THROW((void)asset_cap(Amount::from_int(1), 1.0, 1.5), InvalidArgument);
}

TEST(AccountCap, Examples) {
  const std::vector<double> shares{0.5, 0.25};
  const std::vector<Amount> caps{Amount::from_int(100), Amount::from_int(200)};
  EXPECT_EQ(account_cap(shares, caps), Amount::from_int(100));
  const std::vector<double> sole{1.0};
  const std::vector<Amount> one{Amount::from_int(42)};
  EXPECT_EQ(account_cap(sole, one), Amount::from_int(42));
  EXPECT_TRUE(account_cap(std::vector<double>{}, std::vector<Amount>{}).is_zero());
}

TEST(AccountCap, OverAllocatedReserveIsRejected) {
  const std::map<std::string, std::map<Address, double>> shares{{"r1", {{"a", 0.7}, {"b", 0.4}}}};
  const std::map<std::string, Amount> caps{{"r1", Amount::from_int(10)}};
  EXPECT_THROW((void)account_caps(shares, caps), InvalidArgument);
}

TEST(Consume, BalanceTracksUsage) {
  CreditAccount a{"x", Amount::from_int(100), Amount::from_int(100), {}};
  a = consume(a, "fees", Amount::from_int(30));
  a = consume(a, "gas", Amount::from_int(20));
  EXPECT_EQ(a.balance, Amount::from_int(50));
  EXPECT_EQ(a.cap - a.used(), a.balance);
  EXPECT_EQ(consume(a, "fees", Amount{}), a);
}

TEST(Consume, OverdraftLeavesAccountUnchanged) {
  const CreditAccount a{"x", Amount::from_int(100), Amount::from_int(100), {}};
  EXPECT_THROW((void)consume(a, "fees", Amount::from_int(101)), Overdraft);
  EXPECT_THROW((void)consume(a, "fees", Amount::from_int(-1)), InvalidArgument);
}

TEST(Rollover, Examples) {
  CreditAccount a{"x", Amount::from_int(100), Amount::from_int(100), {}};
  a = consume(a, "fees", Amount::from_int(60));
  const auto r = round_rollover(a, Amount::from_int(80));
  EXPECT_EQ(r.replenishment, Amount::from_int(60));
  EXPECT_EQ(r.expired, Amount::from_int(40));
  EXPECT_EQ(r.account.balance, Amount::from_int(80));
  EXPECT_EQ(r.account.cap, Amount::from_int(80));
  EXPECT_TRUE(r.account.usage.empty());

  const CreditAccount full{"x", Amount::from_int(100), Amount::from_int(100), {}};
  EXPECT_TRUE(round_rollover(full, Amount::from_int(100)).replenishment.is_zero());
  const auto spent = consume(full, "fees", Amount::from_int(100));
  EXPECT_EQ(round_rollover(spent, Amount::from_int(100)).replenishment, Amount::from_int(100));
}

TEST(Budget, Examples) {
  EXPECT_EQ(credit_budget(Amount::from_int(500), Amount::from_int(100), Amount::from_int(200)).budget,
            Amount::from_int(400));
  EXPECT_EQ(credit_budget(Amount{}, Amount::from_int(1000), Amount{}).budget, Amount::from_int(1000));
  const auto neg = credit_budget(Amount::from_int(10), Amount::from_int(5), Amount::from_int(20));
  EXPECT_TRUE(neg.budget.is_zero());
  EXPECT_EQ(neg.deficit, Amount::from_int(5));
}

TEST(Budget, GeometricIncrement) {
  ProtocolParams p;
  p.credit_budget_initial = Amount::from_int(1000);
  p.credit_budget_decay = 0.5;
  EXPECT_EQ(budget_increment(1, p), Amount::from_int(1000));
  EXPECT_EQ(budget_increment(3, p), Amount::from_int(250));
}

TEST(FitCaps, ScalesProportionallyWhenOverBudget) {
  const std::map<std::string, Amount> caps{{"A", Amount::from_int(300)}, {"B", Amount::from_int(100)}};
  const auto fit = fit_caps(caps, Amount::from_int(200));
  EXPECT_EQ(fit.caps.at("A"), Amount::from_int(150));
  EXPECT_EQ(fit.caps.at("B"), Amount::from_int(50));
  EXPECT_EQ(fit.issued, Amount::from_int(200));
  EXPECT_EQ(fit.deficit, Amount::from_int(200));
  const auto slack = fit_caps(caps, Amount::from_int(1000));
  EXPECT_EQ(slack.caps, caps);
  EXPECT_TRUE(slack.deficit.is_zero());
}
