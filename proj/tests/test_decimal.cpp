#include <gtest/gtest.h>

#include <vector>

#include "poel/decimal.hpp"
#include "poel/error.hpp"

using poel::Amount;

TEST(Amount, ParsesAndPrintsExactly) {
  for (const char* s : {"0", "1", "-3", "12.5", "0.000000000000000001", "123456789.123456789123456789"}) {
    EXPECT_EQ(Amount::parse(s).to_string(), s);
  }
  EXPECT_THROW((void)Amount::parse("1.0000000000000000001"), poel::InvalidArgument);
  EXPECT_THROW((void)Amount::parse("abc"), poel::InvalidArgument);
}

TEST(Amount, MulDivFloors) {
  const Amount one = Amount::from_int(1);
  const Amount three = Amount::from_int(3);
  EXPECT_EQ(one.mul_div(one, three).raw(), Amount::kScale / 3);
  EXPECT_EQ(Amount::from_int(10).mul_div(three, three), Amount::from_int(10));
}

TEST(Amount, ScaledIsExactForDecimalFactors) {
  EXPECT_EQ(Amount::from_int(1000).scaled(0.05), Amount::from_int(50));
  EXPECT_EQ(Amount::parse("123456789.5").scaled(0.1), Amount::parse("12345678.95"));
}

TEST(Amount, AllocateSumsExactlyAndGivesRemainderToLargest) {
  const std::vector<double> w{1.0, 1.0, 1.0};
  const auto parts = poel::allocate(Amount::from_int(1), w);
  EXPECT_EQ(poel::sum(parts), Amount::from_int(1));
  EXPECT_EQ(parts[0].raw(), Amount::kScale / 3 + 1);
  EXPECT_EQ(parts[1].raw(), Amount::kScale / 3);

  const std::vector<double> zero{0.0, 0.0};
  for (const auto& p : poel::allocate(Amount::from_int(5), zero)) EXPECT_TRUE(p.is_zero());
}

TEST(Amount, ApproxEqualUsesTwelveDigitTolerance) {
  EXPECT_TRUE(poel::approx_equal(Amount::from_int(1), Amount::from_int(1) + Amount::from_raw(1'000'000)));
  EXPECT_FALSE(poel::approx_equal(Amount::from_int(1), Amount::from_int(1) + Amount::from_raw(1'000'001)));
}
