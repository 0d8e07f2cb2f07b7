#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "poel/error.hpp"
#include "poel/ledger.hpp"

using namespace poel;

namespace {

bool has_event(const EpochLedger& l, EventKind kind) {
  return std::any_of(l.events.begin(), l.events.end(), [kind](const LedgerEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST(Genesis, RequiresExactlyOneStakingToken) {
  GenesisSpec spec;
  spec.assets = {{"A", false}, {"B", false}};
  EXPECT_THROW((void)genesis(spec, ProtocolParams{}), InvalidArgument);
  spec.assets = {{"A", true}, {"B", true}};
  EXPECT_THROW((void)genesis(spec, ProtocolParams{}), InvalidArgument);
}

TEST(AdvanceEpoch, EmptyLedgerOnlyMovesTheClock) {
  const auto params = fixture::quiet_params();
  const auto l0 = fixture::small_ledger({"A"}, params);
  const auto book = fixture::flat_book({{"A", 2.0}});
  const auto l1 = advance_epoch(l0, params, book);
  EXPECT_EQ(l1.epoch, l0.epoch + 1);
  EXPECT_TRUE(l1.total_loan().is_zero());
  EXPECT_TRUE(l1.reward_pool.is_zero());
  EXPECT_TRUE(l1.staking_rewards.is_zero());
  EXPECT_TRUE(l1.plan.empty());
}

TEST(AdvanceEpoch, SteadyReserveKeepsItsLoanAndFeedsThePool) {
  const auto params = fixture::quiet_params();
  auto l0 = fixture::small_ledger({"A"}, params);
  const auto book = fixture::flat_book({{"A", 2.0}});
  deposit_collateral(l0, {"lp", "A", "v1", Amount::from_int(1000), 0});

  const auto l1 = advance_epoch(l0, params, book);
  ASSERT_EQ(l1.reserves.size(), 1u);
  EXPECT_EQ(l1.reserves[0].loan, Amount::from_int(1600));  // 1000 * 2 / 1.25

  const auto l2 = advance_epoch(l1, params, book);
  EXPECT_EQ(l2.reserves[0].loan, l1.reserves[0].loan);
  EXPECT_EQ(l2.staking_rewards, Amount::from_int(1600).scaled(params.srr));
  EXPECT_EQ(l2.reward_pool, l1.reward_pool + l2.staking_rewards - l2.plan.budget);
  EXPECT_TRUE(invariant_violations(l1, l2, params, Market{book, {}, {}, {}}).empty());
}

TEST(AdvanceEpoch, PriceDropCurtailsTheLoan) {
  const auto params = fixture::quiet_params();
  auto l0 = fixture::small_ledger({"A"}, params);
  auto book = fixture::flat_book({{"A", 2.0}});
  fixture::set_price_from(book, "A", 2, 1.0);
  deposit_collateral(l0, {"lp", "A", "v1", Amount::from_int(1000), 0});

  const auto l1 = advance_epoch(l0, params, book);
  const auto l2 = advance_epoch(l1, params, book);
  EXPECT_EQ(l2.reserves[0].loan, Amount::from_int(800));
  EXPECT_TRUE(has_event(l2, EventKind::Curtailment));
  EXPECT_EQ(l2.protocol_held, Amount::from_int(800));
  ASSERT_EQ(l2.unstake_queue.size(), 1u);
  EXPECT_EQ(l2.unstake_queue[0].release_epoch, 2 + params.unstake_epochs);
}

TEST(AdvanceEpoch, CurtailedStakeIsReleasedAfterTheUnstakingPeriod) {
  auto params = fixture::quiet_params();
  params.unstake_epochs = 2;
  auto l = fixture::small_ledger({"A"}, params);
  auto book = fixture::flat_book({{"A", 2.0}});
  fixture::set_price_from(book, "A", 2, 1.0);
  deposit_collateral(l, {"lp", "A", "v1", Amount::from_int(1000), 0});
  for (int i = 0; i < 3; ++i) l = advance_epoch(l, params, book);
  EXPECT_EQ(l.epoch, 3);
  EXPECT_EQ(l.protocol_held, Amount::from_int(800));
  l = advance_epoch(l, params, book);
  EXPECT_TRUE(l.protocol_held.is_zero());
  EXPECT_EQ(l.unstaked_total, Amount::from_int(800));
  EXPECT_TRUE(has_event(l, EventKind::UnstakeReleased));
}

TEST(AdvanceEpoch, MissingPriceNamesTheAsset) {
  const auto params = fixture::quiet_params();
  auto l0 = fixture::small_ledger({"A"}, params);
  auto book = fixture::flat_book({{"A", 2.0}});
  deposit_collateral(l0, {"lp", "A", "v1", Amount::from_int(1000), 0});
  book.prices.at("A").resize(static_cast<std::size_t>(0 - fixture::kFirst + 1));
  try {
    (void)advance_epoch(l0, params, book);
    FAIL() << "expected MissingPrice";
  } catch (const MissingPrice& e) {
    EXPECT_EQ(e.asset(), "A");
    EXPECT_EQ(e.epoch(), 1);
  }
}

TEST(AdvanceEpoch, InputIsUntouchedAndOutputDeterministic) {
  const auto params = fixture::quiet_params();
  auto l0 = fixture::small_ledger({"A", "B"}, params);
  const auto book = fixture::flat_book({{"A", 2.0}, {"B", 0.5}});
  deposit_collateral(l0, {"lp", "A", "v1", Amount::from_int(1000), 10});
  deposit_collateral(l0, {"lp2", "B", "v1", Amount::from_int(3000), 0});
  const auto copy = l0;
  const auto a = advance_epoch(l0, params, book);
  const auto b = advance_epoch(l0, params, book);
  EXPECT_EQ(l0, copy);
  EXPECT_EQ(a, b);
}

TEST(AdvanceEpoch, ZeroCeilingCurtailsAllLoans) {
  const auto params = fixture::quiet_params();
  auto l0 = fixture::small_ledger({"A"}, params, Amount{});
  const auto book = fixture::flat_book({{"A", 2.0}});
  deposit_collateral(l0, {"lp", "A", "v1", Amount::from_int(1000), 0});
  const auto l1 = advance_epoch(l0, params, book);
  EXPECT_TRUE(l1.total_loan().is_zero());
}

TEST(Deposit, RejectsStakingTokenAndUnknownValidator) {
  const auto params = fixture::quiet_params();
  auto l = fixture::small_ledger({"A"}, params);
  EXPECT_THROW(deposit_collateral(l, {"lp", "NST", "v1", Amount::from_int(1), 0}), InvalidArgument);
  EXPECT_THROW(deposit_collateral(l, {"lp", "A", "nobody", Amount::from_int(1), 0}), InvalidArgument);
  EXPECT_THROW(deposit_collateral(l, {"lp", "A", "v1", Amount{}, 0}), InvalidArgument);
}

TEST(MarkToMarket, Examples) {
  const auto params = fixture::quiet_params();
  auto l = fixture::small_ledger({"A", "B", "C"}, params);
  auto book = fixture::flat_book({{"A", 1.0}, {"B", 0.5}, {"C", 0.5}});
  deposit_collateral(l, {"lp", "A", "v1", Amount::from_int(100), 0});
  deposit_collateral(l, {"lp", "B", "v1", Amount::from_int(200), 0});
  deposit_collateral(l, {"lp", "C", "v1", Amount::from_int(100), 0});
  l.reserves[1].loan = Amount::from_int(80);
  l.reserves[2].loan = Amount::from_int(80);
  const auto v = mark_to_market(l, book, 0);
  EXPECT_EQ(v.reserves[0].value, Amount::from_int(100));
  EXPECT_EQ(v.reserves[1].value, Amount::from_int(100));
  EXPECT_FALSE(v.reserves[1].undercollateralised);
  EXPECT_EQ(v.reserves[2].value, Amount::from_int(50));
  EXPECT_TRUE(v.reserves[2].undercollateralised);
  EXPECT_EQ(v.flagged, 1u);
  EXPECT_EQ(v.total, Amount::from_int(250));
}
