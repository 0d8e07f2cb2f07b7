#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poel/params.hpp"
#include "poel/types.hpp"

namespace poel::risk {

/// Dense row-major square matrix, sized for asset baskets.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n);

  [[nodiscard]] std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Sample standard deviation (N-1 denominator). Needs N >= 2.
double realized_volatility(std::span<const double> returns);

/// Symmetric, unit diagonal, entries in [-1,1]; throws InvalidArgument otherwise.
void validate_correlation(const Matrix& corr);

/// Pearson correlations of equally long return columns. Constant columns
/// are uncorrelated with everything else.
Matrix correlation(const std::vector<std::vector<double>>& columns);

double portfolio_variance(std::span<const double> weights, std::span<const double> vols, const Matrix& corr);

/// Smallest sample count for which the (1-ci) tail holds one observation.
std::size_t min_samples(double ci);
/// Number of worst observations forming the (1-ci) tail: ceil((1-ci)*n).
std::size_t tail_size(std::size_t n, double ci);

/// Historical VaR as a positive loss: negated worst tail boundary return.
double value_at_risk(std::span<const double> returns, double ci);
/// Historical expected shortfall as a positive loss: negated mean of the
/// ceil((1-ci)*N) worst returns. Throws InsufficientData below min_samples(ci).
double expected_shortfall(std::span<const double> returns, double ci);

/// Half spread plus linear impact: Sp/2 + coeff * Q / V.
/// Zero volume yields +infinity (no depth to absorb any order).
double liquidity_risk(double spread, double volume, double order_size, double impact_coeff);

struct WashFlag {
  std::size_t first = 0;  // tape indices of the paired fills
  std::size_t second = 0;
};

/// Adjacent opposite-sign fills with equal absolute volume (within 1e-12),
/// prices within `price_tol`, and at most `window` timesteps apart.
std::vector<WashFlag> detect_wash_trades(std::span<const Trade> tape, double price_tol, std::int64_t window);

/// Per-sample returns of a weighted portfolio; `columns[j]` holds asset j.
std::vector<double> portfolio_returns(std::span<const double> weights, const std::vector<std::vector<double>>& columns);

struct WeightProblem {
  std::vector<std::string> assets;
  std::size_t nst_index = 0;
  std::vector<double> vols;
  Matrix correlations;
  /// Historical return columns, one per asset, for the ES constraint.
  /// Empty disables the ES constraint.
  std::vector<std::vector<double>> returns;
};

struct TargetWeights {
  std::vector<std::string> assets;
  std::vector<double> weights;  // sums to 1, NST included
  double achieved_variance = 0.0;
  double es_achieved = 0.0;
  std::vector<std::string> filtered;  // excluded by the volatility ceiling
  int iterations = 0;

  [[nodiscard]] double weight_of(const std::string& symbol) const;
};

/// Minimum-variance basket subject to sum(w)=1, w >= 0, w_NST >= w_nst_target,
/// zero weight for non-NST assets above sigma_ceiling, and historical
/// ES(ci) <= es_limit. Projected gradient over the floored simplex with a
/// quadratic ES penalty, then a bisection repair toward a feasible vertex so
/// the returned point satisfies every constraint exactly.
TargetWeights target_weights(const WeightProblem& problem, const ProtocolParams& params);

}  // namespace poel::risk
