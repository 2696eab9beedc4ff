#include <benchmark/benchmark.h>

#include <cmath>

#include "wavegec/bounds.hpp"
#include "wavegec/counterexample.hpp"
#include "wavegec/mode_dynamics.hpp"

using namespace wavegec;

namespace {

const counterexample::ActivationBlock& bench_block() {
  static const counterexample::ActivationBlock blk = [] {
    counterexample::ActivationOptions opts;
    opts.ode_check = false;
    auto [b, v] = counterexample::activation_step(
        10.0, 4.0, 0.0, rates::RateProfile::power(-0.3, -0.5, 1.0),
        rates::ClassParams::make(1.0, 1.0, 4.0), opts);
    (void)v;
    return b;
  }();
  return blk;
}

void BM_CoefficientEval(benchmark::State& state) {
  const coefficients::Coefficient& c = bench_block().coeff;
  const double mid = 0.5 * (bench_block().a + bench_block().b);
  double t = mid;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.value(t));
    t = mid + std::fmod(t, 1.0) * 1e-3;
  }
}
BENCHMARK(BM_CoefficientEval);

void BM_IntegrateConstant(benchmark::State& state) {
  const coefficients::Coefficient c = coefficients::make_constant(2.5);
  const mode_dynamics::ModeState s0{0.0, 0.0, 1.0, 10.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mode_dynamics::integrate_to(c, 10.0, s0, 50.0));
  }
}
BENCHMARK(BM_IntegrateConstant)->Unit(benchmark::kMillisecond);

void BM_IntegrateBlock(benchmark::State& state) {
  const auto& blk = bench_block();
  const mode_dynamics::ModeState s0{blk.a, 0.0, std::pow(2.5, 0.25), blk.lambda};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mode_dynamics::integrate_to(blk.coeff, blk.lambda, s0, blk.b));
  }
}
BENCHMARK(BM_IntegrateBlock)->Unit(benchmark::kMillisecond);

void BM_GrowthEnvelope(benchmark::State& state) {
  const auto profile = rates::RateProfile::power(0.2, -0.2, 1.0);
  const auto params = rates::ClassParams::make(1.0, 1.0, 4.0);
  double t = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bounds::upper_envelope(t, params, profile));
    t = t < 1e6 ? t * 1.1 : 2.0;
  }
}
BENCHMARK(BM_GrowthEnvelope);

void BM_DeviationTable(benchmark::State& state) {
  const auto& blk = bench_block();
  const double mid = 0.5 * (blk.a + blk.b);
  for (auto _ : state) {
    benchmark::DoNotOptimize(blk.coeff.abs_dev_integral(blk.a, mid));
  }
}
BENCHMARK(BM_DeviationTable)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
