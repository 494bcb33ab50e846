#include <benchmark/benchmark.h>

#include "gridroute/dqn_trainer.hpp"
#include "gridroute/grid_env.hpp"
#include "gridroute/oracle_solver.hpp"
#include "gridroute/problem_gen.hpp"

using namespace gridroute;

namespace {

ProblemInstance instance(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  return generate(c);
}

std::vector<Transition> random_batch(const ProblemInstance& p, std::size_t n, Rng& rng) {
  std::vector<Transition> batch;
  EnvState s = reset(p);
  while (batch.size() < n) {
    JointAction a;
    for (int i = 0; i < p.num_agents; ++i) a.push_back(move_from_index(static_cast<int>(rng.uniform_index(4))));
    const StepResult r = step(s, a, p, 50);
    batch.push_back({encode_state(s, p), a, r.reward, encode_state(r.state, p), r.terminal, 0});
    s = r.terminal ? reset(p) : r.state;
  }
  return batch;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const QNetwork net = init_network(1, default_layer_sizes(3, 5, static_cast<int>(state.range(0))));
  const ProblemInstance p = instance(1);
  const Eigen::VectorXd x = normalize(encode_state(reset(p), p), p.cell_count());
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_Forward)->Arg(128)->Arg(512);

static void BM_TrainStep(benchmark::State& state) {
  QNetwork net = init_network(1, default_layer_sizes(3, 5, static_cast<int>(state.range(0))));
  const QNetwork target = sync_target(net);
  AdamState adam = AdamState::for_network(net);
  const ProblemInstance p = instance(2);
  Rng rng(3);
  const auto batch = random_batch(p, 32, rng);
  const TrainStepParams params;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(net, target, adam, batch, params));
}
BENCHMARK(BM_TrainStep)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

static void BM_SolveExact(benchmark::State& state) {
  GeneratorConfig c;
  c.seed = 4;
  c.num_landmarks = static_cast<int>(state.range(0));
  const ProblemInstance p = generate(c);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(p).total_distance);
}
BENCHMARK(BM_SolveExact)->DenseRange(1, 5)->Unit(benchmark::kMicrosecond);

static void BM_EnvStep(benchmark::State& state) {
  const ProblemInstance p = instance(5);
  Rng rng(6);
  EnvState s = reset(p);
  for (auto _ : state) {
    JointAction a;
    for (int i = 0; i < 3; ++i) a.push_back(move_from_index(static_cast<int>(rng.uniform_index(4))));
    const StepResult r = step(s, a, p, 50);
    s = r.terminal ? reset(p) : r.state;
    benchmark::DoNotOptimize(r.reward);
  }
}
BENCHMARK(BM_EnvStep);

static void BM_Episode(benchmark::State& state) {
  TrainerConfig c;
  c.hidden_layers = {static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  c.learn_start = 64;
  DqnTrainer trainer(c);
  const ProblemInstance p = instance(7);
  int episode = 0;
  for (auto _ : state) benchmark::DoNotOptimize(trainer.run_episode(p, episode++ % 300, 0));
}
BENCHMARK(BM_Episode)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
