#include <benchmark/benchmark.h>

#include "kpnp/experiment.hpp"
#include "kpnp/iteration_operator.hpp"

using namespace kpnp;

namespace {

ExperimentConfig config(Task task, std::size_t size) {
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.size = size;
  return cfg;
}

void BM_BuildKernel(benchmark::State& state) {
  const Image guide = make_phantom(std::size_t(state.range(0)), std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(guide, KernelParams{}));
}
BENCHMARK(BM_BuildKernel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ApplyDenoiser(benchmark::State& state) {
  const Problem pr = make_problem(config(Task::inpaint, std::size_t(state.range(0))));
  Vec x = pr.guide.vec(), y(x.size());
  for (auto _ : state) {
    pr.denoiser.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_ApplyDenoiser)->Arg(32)->Arg(64);

void BM_BlurGram(benchmark::State& state) {
  const Problem pr = make_problem(config(Task::deblur, std::size_t(state.range(0))));
  Vec x = pr.guide.vec(), y(x.size());
  for (auto _ : state) {
    pr.op.gram(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_BlurGram)->Arg(32)->Arg(64);

void BM_PnpIteration(benchmark::State& state) {
  const Problem pr = make_problem(config(Task::deblur, 64));
  const auto p = IterationOperator::pnp(pr.op, pr.denoiser, 0.9 / pr.lambda_max);
  const Vec q = p.offset(pr.b);
  Vec x = pr.guide.vec();
  for (auto _ : state) benchmark::DoNotOptimize(x = p.step(x, q));
}
BENCHMARK(BM_PnpIteration);

}  // namespace

BENCHMARK_MAIN();
