#include "poel/decimal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "poel/error.hpp"

namespace poel {
namespace {

using Wide = boost::multiprecision::int256_t;

Wide widen(Amount::Raw v) {
  // cpp_int has no __int128 constructor in every boost release; go via halves.
  const bool neg = v < 0;
  const auto mag = static_cast<unsigned __int128>(neg ? -v : v);
  Wide w = static_cast<std::uint64_t>(mag >> 64);
  w <<= 64;
  w += static_cast<std::uint64_t>(mag & 0xFFFF'FFFF'FFFF'FFFFULL);
  return neg ? Wide(-w) : w;
}

Amount::Raw narrow(const Wide& w) {
  const bool neg = w < 0;
  Wide mag = neg ? Wide(-w) : w;
  const auto lo = static_cast<std::uint64_t>(mag & Wide(0xFFFF'FFFF'FFFF'FFFFULL));
  const auto hi = static_cast<std::uint64_t>(mag >> 64);
  if ((hi >> 63) != 0 || (mag >> 128) != 0) throw InvalidArgument("amount overflow");
  const auto raw = static_cast<Amount::Raw>((static_cast<unsigned __int128>(hi) << 64) | lo);
  return neg ? -raw : raw;
}

constexpr double kScaleD = 1e18;

Amount from_double_impl(double value, bool floor_mode) {
  if (!std::isfinite(value)) throw InvalidArgument("non-finite amount");
  if (std::fabs(value) > 1.0e20) throw InvalidArgument("amount overflow");
  const double whole = std::floor(value);
  const double frac = value - whole;  // exact for |value| < 2^52 magnitudes of interest
  const double frac_units = floor_mode ? std::floor(frac * kScaleD) : std::nearbyint(frac * kScaleD);
  return Amount::from_raw(static_cast<Amount::Raw>(whole) * Amount::kScale + static_cast<Amount::Raw>(frac_units));
}

}  // namespace

Amount Amount::from_double(double value) { return from_double_impl(value, false); }

Amount Amount::from_double_floor(double value) { return from_double_impl(value, true); }

Amount Amount::parse(std::string_view text) {
  if (text.empty()) throw InvalidArgument("empty amount");
  bool neg = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    ++i;
  }
  Raw whole = 0;
  Raw frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '.') {
      if (seen_dot) throw InvalidArgument("malformed amount '" + std::string(text) + "'");
      seen_dot = true;
      continue;
    }
    if (ch < '0' || ch > '9') throw InvalidArgument("malformed amount '" + std::string(text) + "'");
    any_digit = true;
    if (seen_dot) {
      if (++frac_digits > kDigits) throw InvalidArgument("amount has more than 18 fractional digits");
      frac = frac * 10 + (ch - '0');
    } else {
      whole = whole * 10 + (ch - '0');
      if (whole > static_cast<Raw>(1'000'000'000'000'000'000LL) * 100) throw InvalidArgument("amount overflow");
    }
  }
  if (!any_digit) throw InvalidArgument("malformed amount '" + std::string(text) + "'");
  for (int d = frac_digits; d < kDigits; ++d) frac *= 10;
  const Raw raw = whole * kScale + frac;
  return from_raw(neg ? -raw : raw);
}

double Amount::to_double() const {
  const Raw whole = raw_ / kScale;
  const Raw frac = raw_ % kScale;
  return static_cast<double>(whole) + static_cast<double>(frac) / kScaleD;
}

std::string Amount::to_string() const {
  const bool neg = raw_ < 0;
  auto mag = static_cast<unsigned __int128>(neg ? -raw_ : raw_);
  const auto scale = static_cast<unsigned __int128>(kScale);
  auto whole = mag / scale;
  auto frac = mag % scale;

  std::string head;
  do {
    head.push_back(static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole != 0);
  std::reverse(head.begin(), head.end());

  std::string tail(kDigits, '0');
  for (int d = kDigits - 1; d >= 0; --d) {
    tail[static_cast<std::size_t>(d)] = static_cast<char>('0' + static_cast<int>(frac % 10));
    frac /= 10;
  }
  while (!tail.empty() && tail.back() == '0') tail.pop_back();

  std::string out = neg ? "-" : "";
  out += head;
  if (!tail.empty()) {
    out += '.';
    out += tail;
  }
  return out;
}

Amount Amount::scaled(double factor) const {
  if (factor == 1.0) return *this;
  return mul_div(from_double(factor), from_int(1));
}

Amount Amount::mul_div(Amount num, Amount den) const {
  if (den.raw_ == 0) throw InvalidArgument("mul_div by zero");
  Wide n = widen(raw_) * widen(num.raw_);
  Wide d = widen(den.raw_);
  Wide q = n / d;
  // Truncation toward zero -> floor.
  if ((n % d != 0) && ((n < 0) != (d < 0))) q -= 1;
  return from_raw(narrow(q));
}

bool approx_equal(Amount a, Amount b, Amount tol) {
  const Amount diff = a > b ? a - b : b - a;
  return diff <= tol;
}

Amount sum(std::span<const Amount> values) {
  Amount total;
  for (Amount v : values) total += v;
  return total;
}

std::vector<Amount> allocate(Amount total, std::span<const Amount> weights) {
  if (total.is_negative()) throw InvalidArgument("cannot allocate a negative amount");
  std::vector<Amount> parts(weights.size());
  Amount weight_sum;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].is_negative()) throw InvalidArgument("negative allocation weight");
    weight_sum += weights[i];
    if (weights[i] > weights[largest]) largest = i;
  }
  if (weight_sum.is_zero()) return parts;
  Amount assigned;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    parts[i] = total.mul_div(weights[i], weight_sum);
    assigned += parts[i];
  }
  parts[largest] += total - assigned;
  return parts;
}

std::vector<Amount> allocate(Amount total, std::span<const double> weights) {
  // Normalise first so tiny or huge weights keep full fixed-point resolution.
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("invalid allocation weight");
    wsum += w;
  }
  std::vector<Amount> fixed(weights.size());
  if (wsum > 0.0) {
    for (std::size_t i = 0; i < weights.size(); ++i) fixed[i] = Amount::from_double(weights[i] / wsum);
  }
  return allocate(total, std::span<const Amount>(fixed));
}

}  // namespace poel
