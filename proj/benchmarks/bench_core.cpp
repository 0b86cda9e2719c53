#include <benchmark/benchmark.h>

#include "qdiv/discrimination.hpp"
#include "qdiv/dynamics.hpp"
#include "qdiv/entropy.hpp"
#include "qdiv/maps.hpp"
#include "qdiv/random.hpp"

namespace {

using namespace qdiv;

void BM_Eigh(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const CMatrix rho = random_density(n, n, 1).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(eigh(rho));
}
BENCHMARK(BM_Eigh)->Arg(4)->Arg(16)->Arg(64);

void BM_SandwichedDivergence(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const CMatrix rho = random_density(n, n, 2).matrix();
  const CMatrix sigma = random_density(n, n, 3).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(sandwiched_divergence(rho, sigma, 2.0));
}
BENCHMARK(BM_SandwichedDivergence)->Arg(4)->Arg(16);

void BM_GuessingSdp(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::vector<DensityOperator> states;
  std::vector<double> probs;
  for (int i = 0; i < 4; ++i) {
    states.push_back(random_density(n, n, 10 + i));
    probs.push_back(0.25);
  }
  const StateEnsemble ens(probs, states);
  for (auto _ : state) benchmark::DoNotOptimize(p_guess(ens).value);
}
BENCHMARK(BM_GuessingSdp)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_DiamondNorm(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const QuantumMap diff = channels::random_cptp(d, d, 2, 5) - channels::random_cptp(d, d, 2, 6);
  for (auto _ : state) benchmark::DoNotOptimize(diamond_norm(diff));
}
BENCHMARK(BM_DiamondNorm)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_KPositivity(benchmark::State& state) {
  const QuantumMap t = channels::transposition(3);
  for (auto _ : state) benchmark::DoNotOptimize(k_positivity(t, 2, 16, 0).min_value);
}
BENCHMARK(BM_KPositivity)->Unit(benchmark::kMillisecond);

void BM_PropagateEternal(benchmark::State& state) {
  const Model m = model("eternal", {});
  const auto grid = make_grid(3.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evolve(m, grid).maps.size());
}
BENCHMARK(BM_PropagateEternal)->Arg(31)->Arg(201)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
