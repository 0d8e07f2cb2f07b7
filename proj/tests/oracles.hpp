#pragma once

// Independent reference computations used to check the library. Nothing
// here calls into poel's risk or collateral code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

inline double sigmoid_incentive(double t, double lo, double hi, double k, double mid, double shape) {
  return lo + (hi - lo) / std::pow(1.0 + std::exp(-k * (t - mid)), shape);
}

/// The three-asset multiplier written out term by term:
/// (S1 P1 r2 r3 + S2 P2 r1 r3 + S3 P3 r1 r2) / (r1 r2 r3 T).
inline double three_asset_multiplier(const double s[3], const double p[3], const double r[3], double ceiling) {
  const double num = s[0] * p[0] * r[1] * r[2] + s[1] * p[1] * r[0] * r[2] + s[2] * p[2] * r[0] * r[1];
  return num / (r[0] * r[1] * r[2] * ceiling);
}

/// Mean of the ceil((1-ci) n) smallest values, negated.
inline double shortfall(std::vector<double> xs, double ci) {
  std::sort(xs.begin(), xs.end());
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - ci) * static_cast<double>(xs.size()) - 1e-9));
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += xs[i];
  return -s / static_cast<double>(k);
}

inline double sample_sd(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct GridResult {
  bool feasible = false;
  std::vector<double> weights;
  double variance = std::numeric_limits<double>::infinity();
};

/// Exhaustive 0.01-step search over three-asset weights (index 0 is the
/// staking token) minimising w' Cov w subject to the staking-token floor,
/// the volatility ceiling and the historical shortfall limit.
inline GridResult grid_min_variance(const std::vector<double>& vols, const std::vector<std::vector<double>>& corr,
                                    const std::vector<std::vector<double>>& returns, double nst_floor,
                                    double sigma_ceiling, double es_limit, double ci) {
  GridResult best;
  const int steps = 100;
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; a + b <= steps; ++b) {
      const int c = steps - a - b;
      const double w[3] = {a / 100.0, b / 100.0, c / 100.0};
      if (w[0] < nst_floor - 1e-12) continue;
      bool filtered = false;
      for (int j = 1; j < 3; ++j) {
        if (vols[j] > sigma_ceiling && w[j] > 0.0) filtered = true;
      }
      if (filtered) continue;
      if (!returns.empty()) {
        std::vector<double> port(returns[0].size(), 0.0);
        for (std::size_t t = 0; t < port.size(); ++t) {
          for (int j = 0; j < 3; ++j) port[t] += w[j] * returns[j][t];
        }
        if (shortfall(port, ci) > es_limit + 1e-12) continue;
      }
      double var = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) var += w[i] * w[j] * corr[i][j] * vols[i] * vols[j];
      }
      if (var < best.variance - 1e-15) {
        best.feasible = true;
        best.variance = var;
        best.weights.assign(w, w + 3);
      }
    }
  }
  return best;
}

}  // namespace oracle
