#include "poel/credits.hpp"

#include <cmath>

#include "poel/error.hpp"

namespace poel::credits {

Amount CreditAccount::used() const {
  Amount total;
  for (const auto& [service, n] : usage) total += n;
  return total;
}

Amount asset_cap(Amount size, double price, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  if (size.is_negative()) throw InvalidArgument("reserve size must be >= 0");
  if (!(price > 0.0)) throw InvalidArgument("price must be positive");
  if (gamma == 0.0 || size.is_zero()) return Amount{};
  return size.scaled(price).scaled(gamma);
}

Amount account_cap(std::span<const double> shares, std::span<const Amount> asset_caps) {
  if (shares.size() != asset_caps.size()) throw InvalidArgument("account_cap: one share per asset cap");
  Amount total;
  for (std::size_t q = 0; q < shares.size(); ++q) {
    if (!(shares[q] >= 0.0 && shares[q] <= 1.0)) throw InvalidArgument("account_cap: share outside [0, 1]");
    total += asset_caps[q].scaled(shares[q]);
  }
  return total;
}

std::map<Address, Amount> account_caps(const std::map<std::string, std::map<Address, double>>& shares,
                                       const std::map<std::string, Amount>& asset_caps) {
  std::map<Address, Amount> out;
  for (const auto& [reserve, holders] : shares) {
    double total = 0.0;
    for (const auto& [addr, s] : holders) {
      if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("share of '" + addr + "' in '" + reserve + "' outside [0, 1]");
      total += s;
    }
    if (total > 1.0 + 1e-12) {
      throw InvalidArgument("shares in reserve '" + reserve + "' sum to " + std::to_string(total) + " > 1");
    }
    const auto cap = asset_caps.find(reserve);
    if (cap == asset_caps.end()) throw InvalidArgument("no asset cap for reserve '" + reserve + "'");
    for (const auto& [addr, s] : holders) out[addr] += cap->second.scaled(s);
  }
  return out;
}

CreditAccount consume(const CreditAccount& account, const std::string& service, Amount amount) {
  if (amount.is_negative()) throw InvalidArgument("credit consumption must be >= 0");
  if (amount > account.balance) {
    throw Overdraft("credit overdraft for '" + account.address + "': balance " + account.balance.to_string() +
                    ", requested " + amount.to_string());
  }
  CreditAccount next = account;
  if (amount.is_zero()) return next;
  next.balance -= amount;
  next.usage[service] += amount;
  return next;
}

Rollover round_rollover(const CreditAccount& account, Amount new_cap) {
  if (account.balance.is_negative() || account.balance > account.cap) {
    throw InvalidArgument("end balance outside [0, cap] for '" + account.address + "'");
  }
  if (new_cap.is_negative()) throw InvalidArgument("credit cap must be >= 0");
  Rollover r;
  r.replenishment = account.cap - account.balance;
  r.expired = account.balance;
  r.account.address = account.address;
  r.account.cap = new_cap;
  r.account.balance = new_cap;
  return r;
}

Budget credit_budget(Amount prev, Amount delta, Amount issued_prev) {
  const Amount raw = prev + delta - issued_prev;
  if (raw.is_negative()) return {Amount{}, -raw};
  return {raw, Amount{}};
}

Amount budget_increment(int round, const ProtocolParams& params) {
  if (round < 1) throw InvalidArgument("rounds are numbered from 1");
  return params.credit_budget_initial.scaled(std::pow(params.credit_budget_decay, round - 1));
}

FittedCaps fit_caps(const std::map<std::string, Amount>& caps, Amount budget) {
  FittedCaps f;
  std::vector<Amount> values;
  for (const auto& [asset, cap] : caps) {
    if (cap.is_negative()) throw InvalidArgument("credit cap must be >= 0");
    values.push_back(cap);
    f.requested += cap;
  }
  if (f.requested <= budget) {
    f.caps = caps;
    f.issued = f.requested;
    return f;
  }
  f.deficit = f.requested - max(budget, Amount{});
  const auto fitted = allocate(max(budget, Amount{}), std::span<const Amount>(values));
  std::size_t i = 0;
  for (const auto& [asset, cap] : caps) f.caps[asset] = fitted[i++];
  f.issued = sum(fitted);
  return f;
}

}  // namespace poel::credits
