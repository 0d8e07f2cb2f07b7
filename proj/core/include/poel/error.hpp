#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace poel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Not enough samples/history for a statistic or rule lookback.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Asset has a zero target weight and cannot be quoted as collateral.
class NotAdmissible : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class Overdraft : public Error {
 public:
  using Error::Error;
};

class MissingPrice : public Error {
 public:
  MissingPrice(std::string asset, std::int64_t epoch)
      : Error("missing price for asset '" + asset + "' at epoch " + std::to_string(epoch)),
        asset_(std::move(asset)),
        epoch_(epoch) {}

  [[nodiscard]] const std::string& asset() const { return asset_; }
  [[nodiscard]] std::int64_t epoch() const { return epoch_; }

 private:
  std::string asset_;
  std::int64_t epoch_;
};

/// Engine invariant broken or engine step rejected during a run.
class EngineError : public Error {
 public:
  EngineError(std::int64_t epoch, const std::string& cause)
      : Error("epoch " + std::to_string(epoch) + ": " + cause), epoch_(epoch) {}

  [[nodiscard]] std::int64_t epoch() const { return epoch_; }

 private:
  std::int64_t epoch_;
};

}  // namespace poel
