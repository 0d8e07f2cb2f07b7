#pragma once

#include <map>
#include <string>
#include <vector>

#include "poel/ledger.hpp"
#include "poel/params.hpp"

namespace fixture {

inline constexpr poel::Epoch kFirst = -60;
inline constexpr poel::Epoch kLast = 60;

/// Constant prices over [kFirst, kLast] with one unit trade per epoch so
/// every asset passes the liquidity rule.
inline poel::PriceBook flat_book(const std::map<std::string, double>& prices, const std::string& nst = "NST") {
  poel::PriceBook book;
  book.first_epoch = kFirst;
  book.steps_per_epoch = 1;
  book.nst_symbol = nst;
  const auto n = static_cast<std::size_t>(kLast - kFirst + 1);
  book.prices[nst] = std::vector<double>(n, 1.0);
  for (const auto& [sym, p] : prices) {
    book.prices[sym] = std::vector<double>(n, p);
    book.spreads[sym] = std::vector<double>(n, 0.001);
    auto& tape = book.tapes[sym];
    for (poel::Epoch e = kFirst; e <= kLast; ++e) tape.push_back({e, e % 2 == 0 ? 1.0 : -2.0, p});
  }
  return book;
}

/// Changes one asset's price from `from` onward.
inline void set_price_from(poel::PriceBook& book, const std::string& sym, poel::Epoch from, double p) {
  auto& series = book.prices.at(sym);
  for (poel::Epoch e = from; e <= kLast; ++e) series[static_cast<std::size_t>(e - kFirst)] = p;
}

inline poel::ProtocolParams quiet_params() {
  poel::ProtocolParams p;
  p.w_nst_target = 0.5;
  p.risk_lookback = 20;
  p.qualification_lookback = 10;
  p.reweight_interval = 1000;
  return p;
}

/// NST plus the given collateral assets and one validator with ample headroom.
inline poel::EpochLedger small_ledger(const std::vector<std::string>& collateral, const poel::ProtocolParams& params,
                                      poel::Amount direct = poel::Amount::from_int(100000)) {
  poel::GenesisSpec spec;
  spec.assets.push_back({"NST", true});
  for (const auto& s : collateral) spec.assets.push_back({s, false});
  spec.validators.push_back({"v1", direct, poel::Amount::from_int(1000), true});
  return poel::genesis(spec, params);
}

}  // namespace fixture
