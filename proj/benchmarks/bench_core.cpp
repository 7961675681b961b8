#include <benchmark/benchmark.h>

#include <cmath>

#include "ecotherm/exchange.hpp"
#include "ecotherm/phase.hpp"
#include "ecotherm/thermo.hpp"

using namespace ecotherm;

namespace {

ModelSpec monomial(double delta) {
  FamilyParams p;
  p.family = Family::monomial;
  p.delta = delta;
  return make_model(p);
}

ModelSpec pareto(double c1) {
  FamilyParams p;
  p.family = Family::pareto;
  p.c1 = c1;
  return make_model(p);
}

void BM_Integrate1dHalfLine(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_1d([](double x) { return std::exp(-x * x); }, {0.0, inf}).value);
}
BENCHMARK(BM_Integrate1dHalfLine);

void BM_Integrate1dPowerTail(benchmark::State& state) {
  const double alpha = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        integrate_1d([alpha](double x) { return std::pow(x, -1.0 - alpha); }, {1.0, inf}).value);
}
BENCHMARK(BM_Integrate1dPowerTail)->Arg(1)->Arg(100)->Arg(1000);

void BM_PartitionParsedExpression(benchmark::State& state) {
  const ModelSpec spec{parse_money_fn("c1*l1^2", 1), {{0.0, inf}}, {{"c1", 1.0}}, 1.0, {}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(partition_function(spec, 2.0));
}
BENCHMARK(BM_PartitionParsedExpression);

void BM_CoupledTwoDimensional(benchmark::State& state) {
  const ModelSpec spec{parse_money_fn("l1^2 + l1*l2 + l2^2", 2), {{-inf, inf}, {-inf, inf}}, {}, 1.0, {}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(partition_function(spec, 1.0));
}
BENCHMARK(BM_CoupledTwoDimensional)->Unit(benchmark::kMillisecond);

void BM_ThermoState(benchmark::State& state) {
  const ModelSpec spec = state.range(0) == 0 ? monomial(2.0) : pareto(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(thermo_state(spec, 1.0).C);
}
BENCHMARK(BM_ThermoState)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ParetoScan(benchmark::State& state) {
  const ModelSpec spec = pareto(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(scan_temperature(spec, 0.5, 1.9, 50).events.size());
}
BENCHMARK(BM_ParetoScan)->Unit(benchmark::kMillisecond);

void BM_ExchangeSteps(benchmark::State& state) {
  Ensemble e = init_ensemble(10000, 10000.0, 42, InitMode::equal);
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    e = run(std::move(e), steps);
    benchmark::DoNotOptimize(e.holdings.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExchangeSteps)->Arg(1 << 16);

void BM_FitBoltzmann(benchmark::State& state) {
  const Ensemble e = run(init_ensemble(10000, 10000.0, 42, InitMode::equal), 1000000);
  for (auto _ : state) benchmark::DoNotOptimize(fit_boltzmann(e).ks_stat);
}
BENCHMARK(BM_FitBoltzmann);

}  // namespace
BENCHMARK_MAIN();
