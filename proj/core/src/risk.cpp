#include "poel/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "poel/error.hpp"

namespace poel::risk {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double realized_volatility(std::span<const double> returns) {
  const std::size_t n = returns.size();
  if (n < 2) throw InsufficientData("volatility needs at least 2 returns, got " + std::to_string(n));
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

void validate_correlation(const Matrix& corr) {
  const std::size_t n = corr.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(corr(i, i) - 1.0) > 1e-12) throw InvalidArgument("correlation diagonal must be 1");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = corr(i, j);
      if (!std::isfinite(v) || v < -1.0 - 1e-12 || v > 1.0 + 1e-12) {
        throw InvalidArgument("correlation entries must lie in [-1,1]");
      }
      if (std::fabs(v - corr(j, i)) > 1e-12) throw InvalidArgument("correlation matrix must be symmetric");
    }
  }
}

Matrix correlation(const std::vector<std::vector<double>>& columns) {
  const std::size_t n = columns.size();
  Matrix out = Matrix::identity(n);
  if (n == 0) return out;
  const std::size_t len = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != len) throw InvalidArgument("return columns differ in length");
  }
  std::vector<double> mean(n, 0.0);
  std::vector<double> sd(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    mean[j] = len ? std::accumulate(columns[j].begin(), columns[j].end(), 0.0) / static_cast<double>(len) : 0.0;
    double ss = 0.0;
    for (double v : columns[j]) ss += (v - mean[j]) * (v - mean[j]);
    sd[j] = std::sqrt(ss);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double r = 0.0;
      if (sd[a] > 0.0 && sd[b] > 0.0) {
        double cross = 0.0;
        for (std::size_t t = 0; t < len; ++t) cross += (columns[a][t] - mean[a]) * (columns[b][t] - mean[b]);
        r = std::clamp(cross / (sd[a] * sd[b]), -1.0, 1.0);
      }
      out(a, b) = r;
      out(b, a) = r;
    }
  }
  return out;
}

double portfolio_variance(std::span<const double> weights, std::span<const double> vols, const Matrix& corr) {
  const std::size_t n = weights.size();
  if (vols.size() != n || corr.size() != n) throw InvalidArgument("portfolio_variance: dimension mismatch");
  validate_correlation(corr);
  double var = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t j = 0; j < n; ++j) var += weights[b] * weights[j] * corr(b, j) * vols[b] * vols[j];
  }
  return var;
}

std::size_t min_samples(double ci) {
  if (!(ci > 0.0 && ci < 1.0)) throw InvalidArgument("confidence level must lie in (0,1)");
  return static_cast<std::size_t>(std::ceil(1.0 / (1.0 - ci) - 1e-9));
}

std::size_t tail_size(std::size_t n, double ci) {
  if (!(ci > 0.0 && ci < 1.0)) throw InvalidArgument("confidence level must lie in (0,1)");
  const double raw = std::ceil((1.0 - ci) * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, std::max<std::size_t>(n, 1));
}

namespace {

std::vector<double> sorted_copy(std::span<const double> returns, double ci) {
  const std::size_t need = min_samples(ci);
  if (returns.size() < need) {
    throw InsufficientData("expected shortfall at ci=" + std::to_string(ci) + " needs at least " + std::to_string(need) +
                           " samples, got " + std::to_string(returns.size()));
  }
  std::vector<double> s(returns.begin(), returns.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double value_at_risk(std::span<const double> returns, double ci) {
  const auto s = sorted_copy(returns, ci);
  return -s[tail_size(s.size(), ci) - 1];
}

double expected_shortfall(std::span<const double> returns, double ci) {
  const auto s = sorted_copy(returns, ci);
  const std::size_t k = tail_size(s.size(), ci);
  double tail = 0.0;
  for (std::size_t i = 0; i < k; ++i) tail += s[i];
  return -tail / static_cast<double>(k);
}

double liquidity_risk(double spread, double volume, double order_size, double impact_coeff) {
  if (spread < 0.0 || order_size < 0.0 || volume < 0.0) throw InvalidArgument("liquidity_risk: negative input");
  if (volume == 0.0) return std::numeric_limits<double>::infinity();
  return spread / 2.0 + impact_coeff * order_size / volume;
}

std::vector<WashFlag> detect_wash_trades(std::span<const Trade> tape, double price_tol, std::int64_t window) {
  std::vector<WashFlag> out;
  for (std::size_t i = 0; i + 1 < tape.size(); ++i) {
    const Trade& a = tape[i];
    const Trade& b = tape[i + 1];
    const bool opposite = (a.volume > 0.0 && b.volume < 0.0) || (a.volume < 0.0 && b.volume > 0.0);
    if (!opposite) continue;
    if (std::fabs(std::fabs(a.volume) - std::fabs(b.volume)) > 1e-12) continue;
    if (std::fabs(a.price - b.price) > price_tol) continue;
    if (b.timestep - a.timestep > window) continue;
    out.push_back({i, i + 1});
    ++i;  // a fill belongs to at most one pair
  }
  return out;
}

std::vector<double> portfolio_returns(std::span<const double> weights, const std::vector<std::vector<double>>& columns) {
  if (weights.size() != columns.size()) throw InvalidArgument("portfolio_returns: dimension mismatch");
  const std::size_t len = columns.empty() ? 0 : columns.front().size();
  std::vector<double> out(len, 0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != len) throw InvalidArgument("return columns differ in length");
    if (weights[j] == 0.0) continue;
    for (std::size_t t = 0; t < len; ++t) out[t] += weights[j] * columns[j][t];
  }
  return out;
}

double TargetWeights::weight_of(const std::string& symbol) const {
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (assets[i] == symbol) return weights[i];
  }
  return 0.0;
}

namespace {

constexpr int kIterationBudget = 10'000;
constexpr double kTolerance = 1e-8;

/// Euclidean projection onto {v >= 0, sum v = radius} restricted to `active`.
void project_simplex(std::vector<double>& v, const std::vector<bool>& active, double radius) {
  std::vector<double> u;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (active[i]) u.push_back(v[i]);
  }
  if (u.empty()) return;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = active[i] ? std::max(v[i] - theta, 0.0) : 0.0;
}

class WeightSolver {
 public:
  WeightSolver(const WeightProblem& p, const ProtocolParams& params, std::vector<bool> active)
      : problem_(p), params_(params), active_(std::move(active)), n_(p.vols.size()), cov_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) cov_(i, j) = p.vols[i] * p.vols[j] * p.correlations(i, j);
    }
    es_active_ = !p.returns.empty();
  }

  std::vector<double> project(std::vector<double> w) const {
    const std::size_t nst = problem_.nst_index;
    const double floor = params_.w_nst_target;
    w[nst] -= floor;
    project_simplex(w, active_, 1.0 - floor);
    w[nst] += floor;
    return w;
  }

  double variance(const std::vector<double>& w) const {
    double v = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) v += w[i] * cov_(i, j) * w[j];
    }
    return v;
  }

  double es(const std::vector<double>& w) const {
    if (!es_active_) return 0.0;
    const auto r = portfolio_returns(w, problem_.returns);
    return expected_shortfall(r, params_.ci);
  }

  /// ES subgradient: minus the mean asset return over the portfolio's tail samples.
  std::vector<double> es_gradient(const std::vector<double>& w) const {
    const auto r = portfolio_returns(w, problem_.returns);
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t k = tail_size(r.size(), params_.ci);
    std::stable_sort(idx.begin(), idx.end(), [&r](std::size_t a, std::size_t b) { return r[a] < r[b]; });
    std::vector<double> g(n_, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t j = 0; j < n_; ++j) g[j] -= problem_.returns[j][idx[t]] / static_cast<double>(k);
    }
    return g;
  }

  double objective(const std::vector<double>& w, double mu) const {
    double f = variance(w);
    if (mu > 0.0) {
      const double h = std::max(0.0, es(w) - params_.es_limit);
      f += mu * h * h;
    }
    return f;
  }

  std::vector<double> gradient(const std::vector<double>& w, double mu) const {
    std::vector<double> g(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) g[i] += 2.0 * cov_(i, j) * w[j];
    }
    if (mu > 0.0) {
      const double h = std::max(0.0, es(w) - params_.es_limit);
      if (h > 0.0) {
        const auto ge = es_gradient(w);
        for (std::size_t i = 0; i < n_; ++i) g[i] += 2.0 * mu * h * ge[i];
      }
    }
    return g;
  }

  /// Projected gradient with backtracking; returns the iterations used.
  int descend(std::vector<double>& w, double mu, int budget) const {
    double step = 1.0;
    int it = 0;
    double fw = objective(w, mu);
    for (; it < budget; ++it) {
      const auto g = gradient(w, mu);
      std::vector<double> next;
      double fnext = 0.0;
      double max_move = 0.0;
      for (;;) {
        std::vector<double> trial(n_);
        for (std::size_t i = 0; i < n_; ++i) trial[i] = w[i] - step * g[i];
        next = project(std::move(trial));
        fnext = objective(next, mu);
        double lin = 0.0;
        double sq = 0.0;
        max_move = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
          const double d = next[i] - w[i];
          lin += g[i] * d;
          sq += d * d;
          max_move = std::max(max_move, std::fabs(d));
        }
        if (fnext <= fw + lin + sq / (2.0 * step) + 1e-18 || step < 1e-16) break;
        step *= 0.5;
      }
      const bool converged = max_move / step <= kTolerance || max_move <= 1e-15;
      if (fnext <= fw) {
        w = std::move(next);
        fw = fnext;
      }
      if (converged) break;
      step = std::min(step * 2.0, 1e6);
    }
    return it;
  }

  const std::vector<bool>& active() const { return active_; }
  bool es_active() const { return es_active_; }

 private:
  const WeightProblem& problem_;
  const ProtocolParams& params_;
  std::vector<bool> active_;
  std::size_t n_;
  Matrix cov_;
  bool es_active_ = false;
};

}  // namespace

TargetWeights target_weights(const WeightProblem& problem, const ProtocolParams& params) {
  const std::size_t n = problem.assets.size();
  if (n == 0) throw InvalidArgument("target_weights: empty asset list");
  if (problem.vols.size() != n || problem.correlations.size() != n) {
    throw InvalidArgument("target_weights: dimension mismatch");
  }
  if (problem.nst_index >= n) throw InvalidArgument("target_weights: NST index out of range");
  if (!problem.returns.empty() && problem.returns.size() != n) {
    throw InvalidArgument("target_weights: return columns do not match assets");
  }
  validate_correlation(problem.correlations);
  const double floor = params.w_nst_target;
  if (!(floor >= 0.0) || floor > 1.0) throw Infeasible("NST weight floor " + std::to_string(floor) + " exceeds 1");

  TargetWeights out;
  out.assets = problem.assets;
  std::vector<bool> active(n, false);
  std::size_t admitted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == problem.nst_index) {
      active[i] = true;
    } else if (problem.vols[i] > params.sigma_ceiling) {
      out.filtered.push_back(problem.assets[i]);
    } else {
      active[i] = true;
      ++admitted;
    }
  }

  WeightSolver solver(problem, params, active);
  if (solver.es_active()) {
    const std::size_t need = min_samples(params.ci);
    if (problem.returns.front().size() < need) {
      throw InsufficientData("target_weights ES constraint needs " + std::to_string(need) + " return samples");
    }
  }

  if (admitted == 0) {
    if (n > 1) throw Infeasible("every non-NST asset exceeds the volatility ceiling; no collateral to weight");
    out.weights = {1.0};
    out.achieved_variance = solver.variance(out.weights);
    out.es_achieved = solver.es(out.weights);
    if (out.es_achieved > params.es_limit) throw Infeasible("NST-only basket violates the ES limit");
    return out;
  }

  // Start at the NST-floor corner, remainder spread over admitted assets.
  std::vector<double> w(n, 0.0);
  w[problem.nst_index] = floor;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i] && i != problem.nst_index) w[i] = (1.0 - floor) / static_cast<double>(admitted);
  }

  int used = solver.descend(w, 0.0, kIterationBudget);
  const double limit = params.es_limit;
  if (solver.es_active() && solver.es(w) > limit) {
    for (double mu : {1e2, 1e4, 1e6, 1e8}) {
      if (used >= kIterationBudget) break;
      used += solver.descend(w, mu, kIterationBudget - used);
      if (solver.es(w) <= limit) break;
    }
  }

  if (solver.es_active() && solver.es(w) > limit) {
    // Feasible anchor: best vertex of the floored simplex by ES.
    std::vector<double> anchor;
    double anchor_es = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j]) continue;
      std::vector<double> v(n, 0.0);
      v[problem.nst_index] = floor;
      v[j] += 1.0 - floor;
      const double e = solver.es(v);
      if (e < anchor_es) {
        anchor_es = e;
        anchor = v;
      }
    }
    if (anchor_es > limit) {
      // Subgradient descent on ES alone before declaring infeasibility.
      std::vector<double> v = anchor;
      for (int it = 0; it < 2000 && anchor_es > limit; ++it) {
        const auto g = solver.es_gradient(v);
        const double step = 0.5 / (1.0 + it);
        for (std::size_t i = 0; i < n; ++i) v[i] -= step * g[i];
        v = solver.project(std::move(v));
        const double e = solver.es(v);
        if (e < anchor_es) {
          anchor_es = e;
          anchor = v;
        }
      }
    }
    if (anchor_es > limit) {
      throw Infeasible("no weight vector satisfies ES <= " + std::to_string(limit) + " (best " +
                       std::to_string(anchor_es) + ")");
    }
    // Bisection along [w, anchor]; `hi` stays feasible.
    double lo = 0.0;
    double hi = 1.0;
    const double target = limit - 1e-12;
    auto blend = [&](double t) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (1.0 - t) * w[i] + t * anchor[i];
      return v;
    };
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (solver.es(blend(mid)) <= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    w = blend(hi);
  }

  // Restore exact floor / zero pattern after floating blends.
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i] || w[i] < 0.0) w[i] = 0.0;
  }
  if (w[problem.nst_index] < floor) {
    const double deficit = floor - w[problem.nst_index];
    w[problem.nst_index] = floor;
    std::size_t largest = problem.nst_index;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != problem.nst_index && (largest == problem.nst_index || w[i] > w[largest])) largest = i;
    }
    if (largest != problem.nst_index) w[largest] = std::max(0.0, w[largest] - deficit);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total != 1.0) {
    // Absorb rounding in the largest coordinate that keeps the floor intact.
    std::size_t largest = problem.nst_index;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && w[i] > w[largest]) largest = i;
    }
    if (largest == problem.nst_index && total > 1.0 && w[largest] - (total - 1.0) < floor) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i != problem.nst_index && active[i] && (largest == problem.nst_index || w[i] > w[largest])) largest = i;
      }
    }
    w[largest] += 1.0 - total;
  }

  out.weights = w;
  out.iterations = used;
  out.achieved_variance = solver.variance(w);
  out.es_achieved = solver.es(w);
  return out;
}

}  // namespace poel::risk
