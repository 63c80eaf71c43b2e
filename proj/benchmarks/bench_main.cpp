#include <benchmark/benchmark.h>

#include "roadrl/agent.hpp"
#include "roadrl/env.hpp"
#include "roadrl/nnet.hpp"
#include "roadrl/replay.hpp"

namespace {

using namespace roadrl;

NetworkConfig bench_net(int width) {
  NetworkConfig cfg;
  cfg.obs_rows = 12;
  cfg.obs_cols = 8;
  cfg.encoder_widths = {width, width};
  cfg.lstm_width = width;
  cfg.seed = 1;
  return cfg;
}

void BM_ForwardTrace(benchmark::State& state) {
  const NetworkConfig cfg = bench_net(static_cast<int>(state.range(0)));
  const ParamSet params = init_params(cfg);
  Rng rng(2);
  Tensor trace({10, cfg.obs_rows, cfg.obs_cols});
  for (double& v : trace.data) v = rng.uniform();
  for (auto _ : state) {
    auto out = forward_trace(params, cfg, trace, RecurrentState::zeros(cfg.lstm_width));
    benchmark::DoNotOptimize(out.first.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_ForwardTrace)->Arg(16)->Arg(32)->Arg(64);

void BM_Backward(benchmark::State& state) {
  const NetworkConfig cfg = bench_net(static_cast<int>(state.range(0)));
  const ParamSet params = init_params(cfg);
  Rng rng(3);
  const int b = 10, t = 10;
  Tensor obs({b, t, cfg.obs_rows, cfg.obs_cols});
  for (double& v : obs.data) v = rng.uniform();
  Tensor targets({b, t});
  for (double& v : targets.data) v = rng.uniform(-1.0, 1.0);
  std::vector<std::vector<int>> actions(b, std::vector<int>(t));
  for (auto& row : actions)
    for (int& a : row) a = rng.pick(cfg.actions);
  for (auto _ : state) {
    BackwardResult res = backward(params, cfg, obs, actions, targets, 7);
    benchmark::DoNotOptimize(res.loss);
  }
  state.SetItemsProcessed(state.iterations() * b * t);
}
BENCHMARK(BM_Backward)->Arg(16)->Arg(32);

void BM_EnvStepObserve(benchmark::State& state) {
  RoadEnv env(Track::builtin_loop(), EnvConfig{});
  Rng rng(4);
  env.reset(0, false);
  for (auto _ : state) {
    if (env.terminal()) env.reset(rng.pick(10), false);
    StepResult res = env.step(rng.pick(5));
    benchmark::DoNotOptimize(res.reward);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnvStepObserve);

void BM_SampleTraces(benchmark::State& state) {
  ReplayBuffer buf(1000);
  Rng fill(5);
  for (int e = 0; e < 500; ++e) {
    const int len = 12 + fill.pick(80);
    for (int i = 0; i < len; ++i) {
      Transition tr;
      tr.obs = Tensor({12, 8});
      tr.next_obs = Tensor({12, 8});
      tr.action = fill.pick(5);
      tr.reward = 0.5;
      tr.terminal = i == len - 1;
      buf.push(std::move(tr));
    }
    buf.end_episode();
  }
  Rng rng(6);
  for (auto _ : state) {
    auto traces = buf.sample_traces(10, 10, rng);
    benchmark::DoNotOptimize(traces.data());
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_SampleTraces);

}  // namespace

BENCHMARK_MAIN();
