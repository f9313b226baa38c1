#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "taskspec/ars.hpp"
#include "taskspec/config.hpp"
#include "taskspec/envs.hpp"
#include "taskspec/policy.hpp"

namespace taskspec {
namespace {

const std::string kPhi1 = "achieve reach(5,10) ensuring avoid(4,6,4,6)";

TEST(Mlp, ParameterCount) {
  const Mlp net({5, 30, 30, 3});
  EXPECT_EQ(net.num_params(), 5u * 30 + 30 + 30 * 30 + 30 + 30 * 3 + 3);
  EXPECT_EQ(net.input_size(), 5u);
  EXPECT_EQ(net.output_size(), 3u);
}

TEST(Mlp, ForwardMatchesHandComputation) {
  const Mlp net({2, 2, 1});
  // Hidden: W = [[1, -1], [0.5, 2]], b = [0, -1]; output: W = [[1, -2]], b = [0.1].
  const std::vector<double> params{1, -1, 0.5, 2, 0, -1, 1, -2, 0.1};
  ASSERT_EQ(params.size(), net.num_params());
  std::vector<double> out(1);
  const std::vector<double> x{2.0, 1.0};
  net.forward(params, x, out);
  // h = relu([1, 2]) = [1, 2]; y = tanh(1 - 4 + 0.1).
  EXPECT_DOUBLE_EQ(out[0], std::tanh(-2.9));
  const std::vector<double> neg{-1.0, 0.0};
  net.forward(params, neg, out);
  // h = relu([-1, -1.5]) = 0; y = tanh(0.1).
  EXPECT_DOUBLE_EQ(out[0], std::tanh(0.1));
}

TEST(Mlp, InitZeroesOutputLayerAndBiases) {
  const Mlp net({3, 4, 2});
  std::vector<double> params(net.num_params(), 7.0);
  Rng rng(1);
  net.init(params, rng);
  const double limit = std::sqrt(6.0 / (3 + 4));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_LE(std::abs(params[i]), limit);
  for (std::size_t i = 12; i < params.size(); ++i) EXPECT_EQ(params[i], 0.0);
  std::vector<double> out(2);
  net.forward(params, std::vector<double>{1, 2, 3}, out);
  EXPECT_EQ(out, (std::vector<double>{0.0, 0.0}));
}

struct Fixture {
  explicit Fixture(const std::string& text)
      : spec(parse_spec(text, env.predicates())), monitor(compile(spec)) {}
  PointRobotEnv env;
  Spec spec;
  TaskMonitor monitor;
};

TEST(Policy, PerStateShapes) {
  Fixture f(kPhi1);
  const auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  EXPECT_EQ(set.kind(), PolicyModuleSet::Kind::kPerState);
  ASSERT_EQ(set.num_modules(), 2u);
  EXPECT_EQ(set.module(0).layer_sizes(), (std::vector<std::size_t>{5, 30, 30, 3}));
  EXPECT_EQ(set.module(1).layer_sizes(), (std::vector<std::size_t>{5, 30, 30, 2}));
  EXPECT_EQ(set.module_offset(1), set.module(0).num_params());
  EXPECT_EQ(set.num_params(), set.module(0).num_params() + set.module(1).num_params());
}

TEST(Policy, SingleShape) {
  Fixture f(kPhi1);
  const auto set = PolicyModuleSet::single(f.monitor, f.env);
  ASSERT_EQ(set.num_modules(), 1u);
  EXPECT_EQ(set.module(0).layer_sizes(), (std::vector<std::size_t>{3, 50, 50, 2}));
}

TEST(Policy, ZeroNetworkStaysOnSelfLoop) {
  Fixture f(kPhi1);
  const auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  const AugmentedState s{State{5.0, 10.0, 7.0}, 0, f.monitor.initial_valuation};
  const AugmentedAction a = set.act(s, f.monitor);
  EXPECT_EQ(a.env, (Action{0.0, 0.0}));
  EXPECT_EQ(a.transition, *f.monitor.self_loop(0));
}

// Output bias of the exit score set to `score`, everything else zero.
std::vector<double> exit_bias(const PolicyModuleSet& set, double score) {
  std::vector<double> p(set.num_params(), 0.0);
  p[set.module_offset(0) + set.module(0).num_params() - 1] = score;
  return p;
}

TEST(Policy, ExitTakenOnlyWhenEnabledAndPreferred) {
  Fixture f(kPhi1);
  const auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  const std::size_t exit = f.monitor.exits(0).at(0);
  const AugmentedState at_goal{State{5.0, 10.0, 7.0}, 0, f.monitor.initial_valuation};
  const AugmentedState away{State{5.0, 0.0, 7.0}, 0, f.monitor.initial_valuation};
  const auto keen = exit_bias(set, 1.0);
  EXPECT_EQ(set.act(at_goal, f.monitor, keen).transition, exit);
  // Disabled guard masks the exit.
  EXPECT_EQ(set.act(away, f.monitor, keen).transition, *f.monitor.self_loop(0));
  // A negative score loses against the self loop's implicit zero.
  EXPECT_EQ(set.act(at_goal, f.monitor, exit_bias(set, -1.0)).transition,
            *f.monitor.self_loop(0));
}

TEST(Policy, RegistersAreClipped) {
  Fixture f(kPhi1);
  auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  Rng rng(3);
  set.randomize(rng);
  // Make the first action depend on the first hidden unit only.
  std::vector<double> p(set.params().begin(), set.params().end());
  const AugmentedState clipped{State{5.0, 0.0, 7.0}, 0, {10.0, 10.0}};
  const AugmentedState huge{State{5.0, 0.0, 7.0}, 0, {1e6, 1e6}};
  for (std::size_t i = set.module(0).num_params() - 3 * 31; i < set.module(0).num_params(); ++i) {
    p[i] = 0.1;
  }
  EXPECT_EQ(set.act(clipped, f.monitor, p).env, set.act(huge, f.monitor, p).env);
}

TEST(Checkpoint, RoundTrip) {
  Fixture f(kPhi1);
  auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  Rng rng(5);
  set.randomize(rng);
  std::stringstream buf;
  set.save(buf);
  const auto back = PolicyModuleSet::load(buf, f.monitor);
  EXPECT_EQ(back.kind(), set.kind());
  ASSERT_EQ(back.num_params(), set.num_params());
  for (std::size_t i = 0; i < set.num_params(); ++i) EXPECT_EQ(back.params()[i], set.params()[i]);
  const AugmentedState s{State{1.5, 2.5, 6.0}, 0, {0.3, 4.0}};
  EXPECT_EQ(back.act(s, f.monitor).env, set.act(s, f.monitor).env);
}

TEST(Checkpoint, RejectsOtherMonitorAndGarbage) {
  Fixture f(kPhi1);
  Fixture g("achieve reach(5,10)");
  const auto set = PolicyModuleSet::per_state(f.monitor, f.env);
  std::stringstream buf;
  set.save(buf);
  EXPECT_THROW(PolicyModuleSet::load(buf, g.monitor), CheckpointError);
  std::stringstream junk("not a checkpoint");
  EXPECT_THROW(PolicyModuleSet::load(junk, f.monitor), CheckpointError);
  std::stringstream truncated(buf.str().substr(0, buf.str().size() / 2));
  EXPECT_THROW(PolicyModuleSet::load(truncated, f.monitor), CheckpointError);
}

TEST(RewardModeNames, RoundTrip) {
  for (auto m : {RewardMode::kShaped, RewardMode::kUnshaped, RewardMode::kTltl}) {
    EXPECT_EQ(parse_reward_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_reward_mode("dense"), std::invalid_argument);
}

TEST(ArsConfigTest, Validation) {
  ArsConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.samples_per_iteration(), 60u);
  c.top_directions = 31;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ArsConfig{};
  c.directions = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ArsConfig{};
  c.eval_every = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

ArsConfig small_config(std::uint64_t seed) {
  ArsConfig c;
  c.directions = 6;
  c.top_directions = 3;
  c.iterations = 7;
  c.eval_every = 3;
  c.eval_rollouts = 10;
  c.seed = seed;
  return c;
}

TEST(Ars, CurveScheduleAndSampleCounts) {
  Fixture f(kPhi1);
  PointRobotEnv env;
  const Task task = make_task(env, f.spec, f.monitor);
  const TrainResult r = train(task, small_config(1), RewardMode::kShaped);
  ASSERT_EQ(r.curve.size(), 4u);
  const std::vector<std::size_t> iterations{0, 3, 6, 7};
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    EXPECT_EQ(r.curve[i].iteration, iterations[i]);
    EXPECT_EQ(r.curve[i].samples, iterations[i] * 12);
    EXPECT_GE(r.curve[i].satisfaction, 0.0);
    EXPECT_LE(r.curve[i].satisfaction, 1.0);
  }
  EXPECT_EQ(r.stats.iterations, 7u);
  EXPECT_EQ(r.stats.samples, 84u);
  EXPECT_EQ(r.stats.agreement_violations, 0u);
  EXPECT_EQ(r.stats.alpha_bound_violations, 0u);
  EXPECT_EQ(r.stats.lower_bound_violations, 0u);
}

TEST(Ars, ZeroIterationsGivesEmptyCurve) {
  Fixture f(kPhi1);
  const Task task = make_task(f.env, f.spec, f.monitor);
  ArsConfig c = small_config(1);
  c.iterations = 0;
  const TrainResult r = train(task, c, RewardMode::kShaped);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(r.stats.samples, 0u);
}

TEST(Ars, DeterministicAndThreadIndependent) {
  Fixture f(kPhi1);
  const Task task = make_task(f.env, f.spec, f.monitor);
  for (auto mode : {RewardMode::kShaped, RewardMode::kUnshaped, RewardMode::kTltl}) {
    ArsConfig c = small_config(9);
    const TrainResult a = train(task, c, mode);
    const TrainResult b = train(task, c, mode);
    c.threads = 3;
    const TrainResult t = train(task, c, mode);
    ASSERT_EQ(a.curve.size(), b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      EXPECT_EQ(a.curve[i].mean_reward, b.curve[i].mean_reward);
      EXPECT_EQ(a.curve[i].mean_reward, t.curve[i].mean_reward);
      EXPECT_EQ(a.curve[i].satisfaction, t.curve[i].satisfaction);
    }
    for (std::size_t i = 0; i < a.policy.num_params(); ++i) {
      ASSERT_EQ(a.policy.params()[i], t.policy.params()[i]);
    }
  }
}

TEST(Ars, SeedsDiffer) {
  Fixture f(kPhi1);
  const Task task = make_task(f.env, f.spec, f.monitor);
  const TrainResult a = train(task, small_config(1), RewardMode::kShaped);
  const TrainResult b = train(task, small_config(2), RewardMode::kShaped);
  bool differs = false;
  for (std::size_t i = 0; i < a.policy.num_params(); ++i) {
    differs = differs || a.policy.params()[i] != b.policy.params()[i];
  }
  EXPECT_TRUE(differs);
}

TEST(Ars, StopAtEndsEarly) {
  Fixture f("achieve reach(5,0)");  // satisfied at the start state
  const Task task = make_task(f.env, f.spec, f.monitor);
  ArsConfig c = small_config(1);
  c.stop_at = 0.5;
  const TrainResult r = train(task, c, RewardMode::kTltl);
  ASSERT_EQ(r.curve.size(), 1u);
  EXPECT_EQ(r.curve[0].satisfaction, 1.0);
}

TEST(Ars, RolloutRewardModes) {
  Fixture f(kPhi1);
  const Task task = make_task(f.env, f.spec, f.monitor);
  const auto per_state = PolicyModuleSet::per_state(f.monitor, f.env);
  const auto single = PolicyModuleSet::single(f.monitor, f.env);
  // A zero policy never moves and never reaches the goal.
  const double shaped = rollout_reward(per_state, per_state.params(), task, RewardMode::kShaped, 1);
  EXPECT_LT(shaped, task.shaping.c_lower);
  EXPECT_EQ(rollout_reward(per_state, per_state.params(), task, RewardMode::kUnshaped, 1),
            task.shaping.c_lower);
  // Drifting near (5,0): reach(5,10) robustness stays well below zero.
  const double tltl = rollout_reward(single, single.params(), task, RewardMode::kTltl, 1);
  EXPECT_GT(tltl, -10.0);
  EXPECT_LT(tltl, -7.0);
}

TEST(Ars, EvaluateCountsSatisfaction) {
  Fixture f("achieve reach(5,0)");
  const Task task = make_task(f.env, f.spec, f.monitor);
  const auto single = PolicyModuleSet::single(f.monitor, f.env);
  const EvalResult e = evaluate(single, single.params(), task, RewardMode::kTltl, 25, 3);
  EXPECT_EQ(e.satisfaction, 1.0);
  EXPECT_EQ(e.agreement_violations, 0u);
  EXPECT_GT(e.mean_reward, 0.0);
}

TEST(ConfigTest, ParsesAndTracksUse) {
  const Config c = Config::parse("# c\ndirections = 12\n step_size=0.5 \nflag = true\nname = a b\n");
  EXPECT_EQ(c.get_size("directions", 0), 12u);
  EXPECT_EQ(c.get_double("step_size", 0), 0.5);
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_double("missing", 2.5), 2.5);
  EXPECT_EQ(c.unused_keys(), std::vector<std::string>{"name"});
  EXPECT_EQ(c.get("name"), std::optional<std::string>("a b"));
  EXPECT_TRUE(c.unused_keys().empty());
}

TEST(ConfigTest, Errors) {
  EXPECT_THROW(Config::parse("no equals sign"), ConfigError);
  EXPECT_THROW(Config::parse("= 3"), ConfigError);
  EXPECT_THROW(Config::parse("a = 1\na = 2"), ConfigError);
  const Config c = Config::parse("x = abc\nn = -3\nb = maybe");
  EXPECT_THROW(c.get_double("x", 0), ConfigError);
  EXPECT_THROW(c.get_size("n", 0), ConfigError);
  EXPECT_THROW(c.get_bool("b", false), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/file.cfg"), ConfigError);
}

TEST(ConfigTest, ErrorMentionsOriginAndLine) {
  try {
    Config::parse("a = 1\nbroken", "run.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("run.cfg:2:", 0), 0u) << e.what();
  }
}

}  // namespace
}  // namespace taskspec
