#include <benchmark/benchmark.h>

#include "rrm/baselines.hpp"
#include "rrm/env.hpp"
#include "rrm/nn.hpp"

using namespace rrm;

static void BM_EnvStepFullReuse(benchmark::State& state) {
  EnvConfig cfg;
  cfg.episode_length = 1'000'000;
  Environment env(cfg);
  env.reset(1);
  for (auto _ : state) {
    const auto d = baseline_decide(BaselineKind::full_reuse(), env);
    benchmark::DoNotOptimize(env.step_decisions(d));
  }
}
BENCHMARK(BM_EnvStepFullReuse);

static void BM_EnvStepActions(benchmark::State& state) {
  EnvConfig cfg;
  cfg.episode_length = 1'000'000;
  Environment env(cfg);
  env.reset(2);
  const std::vector<int> actions{1, 2, 0, 3};
  for (auto _ : state) benchmark::DoNotOptimize(env.step(actions));
}
BENCHMARK(BM_EnvStepActions);

static void BM_FadingSample(benchmark::State& state) {
  Rng rng(3);
  const FadingProcess f(24, 4, 8.0, 1e-3, 16, rng);
  long t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(f.sample(5, 2, t++));
}
BENCHMARK(BM_FadingSample);

static void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(4);
  const Mlp net(MlpShape{}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(24, state.range(0));
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(4, state.range(0));
  MlpCache cache;
  for (auto _ : state) {
    net.forward(x, cache);
    benchmark::DoNotOptimize(net.backward(cache, g));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(4)->Arg(4096);
BENCHMARK_MAIN();
