#include "poel/types.hpp"

#include <algorithm>

#include "poel/error.hpp"

namespace poel {
namespace {

std::optional<double> lookup(const std::map<std::string, std::vector<double>>& series, const std::string& symbol,
                             Epoch first_epoch, Epoch epoch) {
  const auto it = series.find(symbol);
  if (it == series.end()) return std::nullopt;
  const Epoch idx = epoch - first_epoch;
  if (idx < 0 || idx >= static_cast<Epoch>(it->second.size())) return std::nullopt;
  return it->second[static_cast<std::size_t>(idx)];
}

}  // namespace

std::optional<double> PriceBook::price(const std::string& symbol, Epoch epoch) const {
  if (symbol == nst_symbol) return 1.0;
  return lookup(prices, symbol, first_epoch, epoch);
}

double PriceBook::require_price(const std::string& symbol, Epoch epoch) const {
  const auto p = price(symbol, epoch);
  if (!p) throw MissingPrice(symbol, epoch);
  if (!(*p > 0.0)) throw InvalidArgument("non-positive price for asset '" + symbol + "'");
  return *p;
}

std::optional<double> PriceBook::reference_price(const std::string& symbol, Epoch epoch) const {
  if (reference.contains(symbol)) return lookup(reference, symbol, first_epoch, epoch);
  return price(symbol, epoch);
}

std::optional<double> PriceBook::spread(const std::string& symbol, Epoch epoch) const {
  return lookup(spreads, symbol, first_epoch, epoch);
}

std::vector<double> PriceBook::reference_returns(const std::string& symbol, Epoch to, int lookback) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(lookback, 0)));
  for (Epoch e = to - lookback + 1; e <= to; ++e) {
    const auto p0 = reference_price(symbol, e - 1);
    const auto p1 = reference_price(symbol, e);
    if (!p0 || !p1) {
      throw InsufficientData("asset '" + symbol + "' lacks " + std::to_string(lookback) +
                             " epochs of price history before epoch " + std::to_string(to));
    }
    out.push_back(*p1 / *p0 - 1.0);
  }
  return out;
}

Epoch PriceBook::epoch_of(std::int64_t timestep) const {
  const auto spe = static_cast<std::int64_t>(std::max(steps_per_epoch, 1));
  // floor division so pre-genesis timesteps land in negative epochs
  std::int64_t q = timestep / spe;
  if (timestep % spe != 0 && timestep < 0) --q;
  return q;
}

std::vector<Trade> PriceBook::trades_in_epochs(const std::string& symbol, Epoch from, Epoch to) const {
  std::vector<Trade> out;
  const auto it = tapes.find(symbol);
  if (it == tapes.end()) return out;
  if (to < from) return out;
  const auto spe = static_cast<std::int64_t>(std::max(steps_per_epoch, 1));
  const auto& tape = it->second;
  auto first = std::lower_bound(tape.begin(), tape.end(), from * spe,
                                [](const Trade& t, std::int64_t ts) { return t.timestep < ts; });
  auto last = std::lower_bound(first, tape.end(), (to + 1) * spe,
                               [](const Trade& t, std::int64_t ts) { return t.timestep < ts; });
  out.assign(first, last);
  return out;
}

Epoch PriceBook::last_epoch() const {
  std::size_t len = 0;
  bool any = false;
  for (const auto& [sym, series] : prices) {
    len = any ? std::min(len, series.size()) : series.size();
    any = true;
  }
  return first_epoch + static_cast<Epoch>(len) - 1;
}

}  // namespace poel
