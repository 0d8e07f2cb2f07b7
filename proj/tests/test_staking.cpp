#include <gtest/gtest.h>

#include <vector>

#include "poel/error.hpp"
#include "poel/staking.hpp"

using namespace poel;
using namespace poel::staking;

namespace {

Validator validator(int direct, int min) { return {"v", Amount::from_int(direct), Amount::from_int(min), true}; }

ReserveState reserve(int size, int loan) {
  ReserveState r;
  r.asset = "A";
  r.validator = "v";
  r.size = Amount::from_int(size);
  r.loan = Amount::from_int(loan);
  return r;
}

}  // namespace

TEST(LivenessCeiling, Examples) {
  ProtocolParams p;
  p.liveness_factor = 1.0;
  EXPECT_TRUE(liveness_ceiling(validator(400, 400), p).is_zero());
  EXPECT_EQ(liveness_ceiling(validator(1000, 400), p), Amount::from_int(600));
  p.liveness_factor = 0.5;
  EXPECT_EQ(liveness_ceiling(validator(1000, 400), p), Amount::from_int(300));
  EXPECT_TRUE(liveness_ceiling(validator(100, 400), p).is_zero());
}

TEST(Slash, ZeroRateChangesNothing) {
  const std::vector<ReserveState> rs{reserve(600, 1000)};
  const std::vector<double> prices{2.0};
  const auto res = slash(rs, prices, 0.0);
  EXPECT_EQ(res.loan_after, Amount::from_int(1000));
  EXPECT_EQ(res.reserves[0].size, Amount::from_int(600));
  EXPECT_EQ(res.reserves[0].loan, Amount::from_int(1000));
}

TEST(Slash, SingleReserve) {
  const std::vector<ReserveState> rs{reserve(600, 1000)};
  const std::vector<double> prices{2.0};
  const auto res = slash(rs, prices, 0.05);
  EXPECT_EQ(res.loan_after, Amount::from_int(950));
  EXPECT_EQ(res.slashed, Amount::from_int(50));
  EXPECT_EQ(res.tokens_removed[0], Amount::from_int(25));
  EXPECT_EQ(res.reserves[0].size, Amount::from_int(575));
  EXPECT_EQ(res.reserves[0].loan, Amount::from_int(950));
  EXPECT_TRUE(res.shortfall.is_zero());
}

TEST(Slash, ProRataByValue) {
  const std::vector<ReserveState> rs{reserve(300, 100), reserve(50, 100)};
  const std::vector<double> prices{1.0, 2.0};  // values 300 and 100
  const auto res = slash(rs, prices, 0.2);      // slash amount 40
  EXPECT_EQ(res.value_removed[0], Amount::from_int(30));
  EXPECT_EQ(res.value_removed[1], Amount::from_int(10));
  EXPECT_EQ(res.tokens_removed[1], Amount::from_int(5));
}

TEST(Slash, InsufficientReserveReportsShortfall) {
  const std::vector<ReserveState> rs{reserve(10, 1000)};
  const std::vector<double> prices{1.0};
  const auto res = slash(rs, prices, 0.5);
  EXPECT_TRUE(res.reserves[0].size.is_zero());
  EXPECT_EQ(res.shortfall, Amount::from_int(490));
}

TEST(Unstake, Examples) {
  ProtocolParams p;
  p.unstake_epochs = 0;
  EXPECT_EQ(request_unstake(Amount::from_int(5), 3, Amount::from_int(5), p).release_epoch, 3);
  p.unstake_epochs = 7;
  const auto t = request_unstake(Amount::from_int(5), 5, Amount::from_int(10), p);
  EXPECT_EQ(t.release_epoch, 12);
  EXPECT_EQ(t.release_epoch - t.request_epoch, p.unstake_epochs);
  EXPECT_TRUE(request_unstake(Amount{}, 5, Amount{}, p).amount.is_zero());
  EXPECT_THROW((void)request_unstake(Amount::from_int(11), 5, Amount::from_int(10), p), InvalidArgument);
}

TEST(Unstake, ReleasesOnlyMaturedTickets) {
  const std::vector<UnstakeTicket> q{{Amount::from_int(1), 0, 7}, {Amount::from_int(2), 3, 10}};
  const auto early = release_matured(q, 6);
  EXPECT_TRUE(early.released.is_zero());
  EXPECT_EQ(early.remaining.size(), 2u);
  const auto r = release_matured(q, 7);
  EXPECT_EQ(r.released, Amount::from_int(1));
  ASSERT_EQ(r.remaining.size(), 1u);
  EXPECT_EQ(r.remaining[0].release_epoch, 10);
}

TEST(Accrual, Examples) {
  EXPECT_TRUE(accrue_staking_rewards(Amount{}, 0.1).is_zero());
  EXPECT_EQ(accrue_staking_rewards(Amount::from_int(1000), 0.1), Amount::from_int(100));
  EXPECT_TRUE(accrue_staking_rewards(Amount::from_int(1000), 0.1, false).is_zero());
}

TEST(LivenessProbability, Examples) {
  EXPECT_TRUE(liveness_probability_check(0, 100, 0.05).pass);
  const auto r = liveness_probability_check(2, 100, 0.05);
  EXPECT_DOUBLE_EQ(r.probability, 0.02);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(liveness_probability_check(1, 100, 0.0).pass);
}
