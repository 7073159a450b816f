#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "liftsim/direct_sampling.hpp"
#include "liftsim/marginal.hpp"
#include "liftsim/naive.hpp"
#include "liftsim/rng.hpp"
#include "liftsim/synth.hpp"

namespace {

using namespace liftsim;

std::vector<double> exp_sample(std::size_t n, std::uint64_t seed) {
  auto eng = rng::engine(seed);
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> x(n);
  for (double& v : x) v = exp1(eng);
  return x;
}

void bm_fit_marginal(benchmark::State& state) {
  const auto sample = exp_sample(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_marginal(sample, 0.05, ShapeMethod::ml));
}
BENCHMARK(bm_fit_marginal)->Arg(300)->Arg(2000);

void bm_marginal_cdf(benchmark::State& state) {
  const auto sample = exp_sample(2000, 7);
  const MarginalModel model = fit_marginal(sample, 0.05, ShapeMethod::ml);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.cdf(x));
    x = x < 6.0 ? x + 0.001 : 0.0;
  }
}
BENCHMARK(bm_marginal_cdf);

void bm_marginal_quantile(benchmark::State& state) {
  const auto sample = exp_sample(2000, 7);
  const MarginalModel model = fit_marginal(sample, 0.05, ShapeMethod::ml);
  double p = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.quantile(p));
    p = p < 0.99 ? p + 0.0007 : 0.01;
  }
}
BENCHMARK(bm_marginal_quantile);

void bm_synth_dense(benchmark::State& state) {
  synth::SynthSpec spec;
  spec.grid = Grid::unit_square(static_cast<std::uint32_t>(state.range(0)),
                                static_cast<std::uint32_t>(state.range(0)));
  spec.m = 10;
  spec.seed = 11;
  for (auto _ : state) benchmark::DoNotOptimize(synth::simulate(spec));
}
BENCHMARK(bm_synth_dense)->Arg(16)->Arg(30);

void bm_ds_realization(benchmark::State& state) {
  synth::SynthSpec spec;
  spec.grid = Grid::unit_square(16, 16);
  spec.m = 8;
  spec.seed = 3;
  const GridStack training = synth::simulate(spec);
  DsParams params;
  params.seed = 5;
  for (auto _ : state)
    benchmark::DoNotOptimize(ds_simulate(training, training.grid, params, {}, 1));
}
BENCHMARK(bm_ds_realization);

void bm_renyi(benchmark::State& state) {
  auto eng = rng::engine(13);
  for (auto _ : state)
    benchmark::DoNotOptimize(renyi_order_statistics(static_cast<std::size_t>(state.range(0)), eng));
}
BENCHMARK(bm_renyi)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
