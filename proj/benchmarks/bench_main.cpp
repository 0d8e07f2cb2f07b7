#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "poel/ledger.hpp"
#include "poel/risk.hpp"
#include "poel/sim.hpp"

using namespace poel;

namespace {

risk::WeightProblem random_problem(std::size_t assets, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  risk::WeightProblem p;
  std::vector<double> market(samples);
  for (double& m : market) m = z(g);
  for (std::size_t i = 0; i < assets; ++i) {
    p.assets.push_back(i == 0 ? "NST" : "A" + std::to_string(i));
    const double vol = 0.01 + 0.05 * u(g);
    const double beta = u(g);
    std::vector<double> col(samples);
    for (std::size_t k = 0; k < samples; ++k) col[k] = vol * (beta * market[k] + std::sqrt(1 - beta * beta) * z(g));
    p.returns.push_back(std::move(col));
  }
  for (const auto& col : p.returns) {
    double mean = 0.0, ss = 0.0;
    for (double x : col) mean += x / static_cast<double>(samples);
    for (double x : col) ss += (x - mean) * (x - mean);
    p.vols.push_back(std::sqrt(ss / static_cast<double>(samples - 1)));
  }
  p.correlations = risk::correlation(p.returns);
  return p;
}

void BM_TargetWeights(benchmark::State& state) {
  const auto problem = random_problem(static_cast<std::size_t>(state.range(0)), 250, 7);
  ProtocolParams params;
  params.w_nst_target = 0.3;
  params.sigma_ceiling = 1.0;
  params.es_limit = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(risk::target_weights(problem, params));
}
BENCHMARK(BM_TargetWeights)->Arg(3)->Arg(6)->Arg(12);

void BM_AdvanceEpoch(benchmark::State& state) {
  auto scenario = sim::random_scenario(11, 60, 6, static_cast<int>(state.range(0)));
  const auto trace = sim::run(scenario);
  const auto& last = trace.ledgers[trace.ledgers.size() - 2];
  for (auto _ : state) benchmark::DoNotOptimize(advance_epoch(last, trace.scenario.params, trace.market));
}
BENCHMARK(BM_AdvanceEpoch)->Arg(5)->Arg(20);

void BM_SimRun(benchmark::State& state) {
  const auto scenario = sim::random_scenario(3, 200);
  auto s = scenario;
  s.epochs = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(s));
}
BENCHMARK(BM_SimRun)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
