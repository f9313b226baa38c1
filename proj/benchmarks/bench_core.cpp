#include <benchmark/benchmark.h>

#include <random>

#include "taskspec/ars.hpp"
#include "taskspec/augmented.hpp"
#include "taskspec/bench.hpp"
#include "taskspec/envs.hpp"
#include "taskspec/policy.hpp"
#include "taskspec/semantics.hpp"

namespace taskspec {
namespace {

const std::string& spec_text(int index) {
  static const std::vector<std::string> names{"phi1", "phi3", "phi5", "phi7"};
  return find_benchmark(names[static_cast<std::size_t>(index)]).spec;
}

// A noisy walk past the benchmark waypoints.
Rollout waypoint_walk(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  Rollout z;
  z.states.push_back({5.0, 0.0, 7.0});
  const double targets[][2] = {{5, 10}, {5, 0}, {10, 0}, {10, 10}, {0, 0}};
  for (std::size_t t = 0; t < length; ++t) {
    const auto& goal = targets[(t * 5 / length) % 5];
    const State& s = z.states.back();
    const double dx = std::clamp(goal[0] - s[0], -1.0, 1.0) + noise(rng);
    const double dy = std::clamp(goal[1] - s[1], -1.0, 1.0) + noise(rng);
    z.actions.push_back({dx, dy});
    z.states.push_back({s[0] + dx, s[1] + dy, s[2]});
  }
  return z;
}

void BM_Parse(benchmark::State& state) {
  const PointRobotEnv env;
  const std::string& text = spec_text(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_spec(text, env.predicates()));
}
BENCHMARK(BM_Parse)->DenseRange(0, 3);

void BM_Compile(benchmark::State& state) {
  const PointRobotEnv env;
  const Spec spec = parse_spec(spec_text(static_cast<int>(state.range(0))), env.predicates());
  for (auto _ : state) benchmark::DoNotOptimize(compile(spec));
}
BENCHMARK(BM_Compile)->DenseRange(0, 3);

void BM_EvalBool(benchmark::State& state) {
  const PointRobotEnv env;
  const Spec spec = parse_spec(spec_text(3), env.predicates());
  const Rollout z = waypoint_walk(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(eval_bool(spec, z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalBool)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_EvalQuant(benchmark::State& state) {
  const PointRobotEnv env;
  const Spec spec = parse_spec(spec_text(3), env.predicates());
  const Rollout z = waypoint_walk(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(eval_quant(spec, z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalQuant)->RangeMultiplier(2)->Range(16, 128)->Complexity();

// One shaped-reward rollout of a random per-state policy (40 steps).
void BM_ShapedRollout(benchmark::State& state) {
  const Problem p = make_problem("point_robot", spec_text(static_cast<int>(state.range(0))));
  auto policy = PolicyModuleSet::per_state(p.monitor, *p.env);
  Rng rng(1);
  policy.randomize(rng);
  const Task task = p.task();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rollout_reward(policy, policy.params(), task, RewardMode::kShaped, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * p.env->horizon());
}
BENCHMARK(BM_ShapedRollout)->DenseRange(0, 3);

void BM_TltlRollout(benchmark::State& state) {
  const Problem p = make_problem("point_robot", spec_text(2));
  auto policy = PolicyModuleSet::single(p.monitor, *p.env);
  Rng rng(1);
  policy.randomize(rng);
  const Task task = p.task();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rollout_reward(policy, policy.params(), task, RewardMode::kTltl, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * p.env->horizon());
}
BENCHMARK(BM_TltlRollout);

// One ARS iteration (60 rollouts) on phi5, evaluation excluded.
void BM_ArsIteration(benchmark::State& state) {
  const Problem p = make_problem("point_robot", spec_text(2));
  const Task task = p.task();
  ArsConfig cfg;
  cfg.iterations = 10;
  cfg.eval_every = 1000;
  cfg.eval_rollouts = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(task, cfg, RewardMode::kShaped));
  }
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
  state.SetLabel("items = ARS iterations");
}
BENCHMARK(BM_ArsIteration)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace taskspec

BENCHMARK_MAIN();
