#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poel {

/// Token amount in fixed point with 18 fractional digits (int128 raw units).
///
/// Addition and subtraction are exact. A product with a rate rounds the rate
/// to 18 digits first and then floors; exact ratios use `mul_div`.
class Amount {
 public:
  using Raw = __int128;
  static constexpr int kDigits = 18;
  static constexpr Raw kScale = static_cast<Raw>(1'000'000'000'000'000'000LL);

  constexpr Amount() = default;

  static constexpr Amount from_raw(Raw raw) {
    Amount a;
    a.raw_ = raw;
    return a;
  }
  static constexpr Amount from_int(std::int64_t units) { return from_raw(static_cast<Raw>(units) * kScale); }

  /// Nearest representable amount.
  static Amount from_double(double value);
  /// Largest representable amount not above `value`.
  static Amount from_double_floor(double value);
  /// Parses "[-]digits[.digits]"; more than 18 fractional digits is an error.
  static Amount parse(std::string_view text);

  [[nodiscard]] constexpr Raw raw() const { return raw_; }
  [[nodiscard]] double to_double() const;
  /// Exact decimal rendering, trailing zeros trimmed ("12.5", "0", "-3").
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] constexpr bool is_zero() const { return raw_ == 0; }
  [[nodiscard]] constexpr bool is_negative() const { return raw_ < 0; }
  [[nodiscard]] constexpr bool is_positive() const { return raw_ > 0; }

  /// Floor of this * from_double(factor).
  [[nodiscard]] Amount scaled(double factor) const;
  /// Floor of this * num / den using a 256-bit intermediate. `den` must be nonzero.
  [[nodiscard]] Amount mul_div(Amount num, Amount den) const;

  constexpr Amount operator-() const { return from_raw(-raw_); }
  constexpr Amount& operator+=(Amount o) {
    raw_ += o.raw_;
    return *this;
  }
  constexpr Amount& operator-=(Amount o) {
    raw_ -= o.raw_;
    return *this;
  }
  friend constexpr Amount operator+(Amount a, Amount b) { return a += b; }
  friend constexpr Amount operator-(Amount a, Amount b) { return a -= b; }
  friend constexpr auto operator<=>(Amount a, Amount b) = default;

 private:
  Raw raw_ = 0;
};

constexpr Amount min(Amount a, Amount b) { return b < a ? b : a; }
constexpr Amount max(Amount a, Amount b) { return a < b ? b : a; }

/// Absolute tolerance used for amount comparisons (1e-12 tokens).
inline constexpr Amount kAmountTolerance = Amount::from_raw(1'000'000);

bool approx_equal(Amount a, Amount b, Amount tol = kAmountTolerance);

Amount sum(std::span<const Amount> values);

/// Splits `total` (>= 0) proportionally to non-negative `weights` so that the
/// parts sum to `total` exactly. Each part is floored; the rounding remainder
/// goes to the largest weight (lowest index on ties). All-zero weights yield
/// all-zero parts and the caller keeps the total.
std::vector<Amount> allocate(Amount total, std::span<const double> weights);
std::vector<Amount> allocate(Amount total, std::span<const Amount> weights);

}  // namespace poel
