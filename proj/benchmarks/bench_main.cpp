#include <benchmark/benchmark.h>

#include "carol/carol.hpp"

using namespace carol;

namespace {

Mlp bench_mlp(int width) {
  return mlp_init({8, width, width, 4}, {Activation::ReLU, Activation::ReLU}, Activation::Identity, 1);
}

void BM_forward(benchmark::State& state) {
  const Mlp m = bench_mlp(static_cast<int>(state.range(0)));
  const std::vector<double> x(8, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_forward)->Arg(32)->Arg(64)->Arg(128);

void BM_backward(benchmark::State& state) {
  const Mlp m = bench_mlp(static_cast<int>(state.range(0)));
  const std::vector<double> x(8, 0.5), up(4, 1.0);
  std::vector<double> grads(m.params.size());
  for (auto _ : state) {
    backward_accumulate(m, x, up, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_backward)->Arg(32)->Arg(64)->Arg(128);

void BM_env_step_gridslip(benchmark::State& state) {
  GridSlipSpec spec;
  spec.slip_p = 0.2;
  const TaskHandle task = make_gridslip(spec);
  const State s = env_reset(task, 0);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(env_step(task, s, gridslip::Right, rng));
}
BENCHMARK(BM_env_step_gridslip);

void BM_env_step_lander(benchmark::State& state) {
  const TaskHandle task = make_windylander(WindyLanderSpec{});
  const State s = env_reset(task, 0);
  Rng rng(1);
  const Action a = std::vector<double>{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(env_step(task, s, a, rng));
}
BENCHMARK(BM_env_step_lander);

void BM_distill_loss(benchmark::State& state) {
  const SpaceSpec space = make_windylander(WindyLanderSpec{}).space();
  const NetworkPolicy student = make_policy_net(space, {{64, 64}, Activation::Tanh, 1});
  std::vector<Policy> teachers;
  for (std::uint64_t i = 0; i < 4; ++i) teachers.push_back(make_policy_net(space, {{64, 64}, Activation::Tanh, 10 + i}));
  const SimilarityWeights w = similarity_weights(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  std::vector<State> states;
  Rng rng(3);
  for (int k = 0; k < state.range(0); ++k)
    states.push_back({rng.uniform(-5, 5), rng.uniform(0, 10), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  for (auto _ : state) benchmark::DoNotOptimize(policy_distill_loss(student, teachers, w, states, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_distill_loss)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
