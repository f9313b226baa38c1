#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "taskspec/envs.hpp"
#include "taskspec/monitor.hpp"
#include "test_support.hpp"

namespace taskspec {
namespace {

using testing::random_spec;
using testing::toy_registry;

const PredicateRegistry& robot() {
  static const PointRobotEnv env;
  return env.predicates();
}

TaskMonitor compile_text(const std::string& text, const CompileOptions& options = {}) {
  return compile(parse_spec(text, robot()), options);
}

std::vector<std::size_t> registers_of(const ValueExpr& e) {
  std::vector<std::size_t> out;
  e.collect_registers(out);
  std::sort(out.begin(), out.end());
  return out;
}

// Registers the constructions allocate: one per achieve slot (shared along
// sequences), one per ensuring conjunct, one hand-over register per sequence.
std::size_t expected_registers(const Spec& s, bool split) {
  switch (s.kind()) {
    case Spec::Kind::kAchieve: return 1;
    case Spec::Kind::kEnsuring:
      return expected_registers(s.body(), split) + (split ? s.predicate().conjuncts().size() : 1);
    case Spec::Kind::kSeq:
      return std::max(expected_registers(s.left(), split), expected_registers(s.right(), split)) +
             1;
    case Spec::Kind::kChoice:
      return expected_registers(s.left(), split) + expected_registers(s.right(), split);
  }
  return 0;
}

std::size_t expected_states(const Spec& s) {
  switch (s.kind()) {
    case Spec::Kind::kAchieve: return 2;
    case Spec::Kind::kEnsuring: return expected_states(s.body());
    case Spec::Kind::kSeq: return expected_states(s.left()) + expected_states(s.right());
    case Spec::Kind::kChoice: return expected_states(s.left()) + expected_states(s.right()) - 1;
  }
  return 0;
}

TEST(CompileAchieve, Shape) {
  const TaskMonitor m = compile_text("achieve reach(5,10)");
  EXPECT_EQ(m.num_states, 2u);
  EXPECT_EQ(m.num_registers(), 1u);
  EXPECT_EQ(m.initial_valuation, Valuation{0.0});
  EXPECT_EQ(m.final_states(), std::vector<std::size_t>{1});
  ASSERT_TRUE(m.reward[1]);
  EXPECT_EQ(*m.reward[1], ValueExpr::reg(0));
  const auto exits = m.exits(0);
  ASSERT_EQ(exits.size(), 1u);
  const Transition& t = m.transitions[exits[0]];
  EXPECT_EQ(t.guard.kind(), Guard::Kind::kHolds);
  ASSERT_TRUE(t.update.assign[0]);
  EXPECT_EQ(t.update.assign[0]->kind(), ValueExpr::Kind::kRobustness);
  EXPECT_TRUE(m.transitions[*m.self_loop(0)].update.is_identity());
  EXPECT_TRUE(m.transitions[*m.self_loop(1)].update.is_identity());
  EXPECT_TRUE(validate_monitor(m).empty());
}

TEST(CompileAchieve, ConjunctiveGoal) {
  const TaskMonitor m = compile_text("achieve fuel_positive and fuel_positive");
  EXPECT_EQ(m.num_states, 2u);
  EXPECT_EQ(m.num_registers(), 1u);
  EXPECT_TRUE(validate_monitor(m).empty());
}

TEST(CompileEnsuring, PhiOne) {
  const TaskMonitor m = compile_text("achieve reach(5,10) ensuring avoid(4,6,4,6)");
  EXPECT_EQ(m.num_states, 2u);
  ASSERT_EQ(m.num_registers(), 2u);
  EXPECT_EQ(m.initial_valuation[1], kDefaultInfinity);
  EXPECT_EQ(registers_of(*m.reward[1]), (std::vector<std::size_t>{0, 1}));
  for (const auto& t : m.transitions) {
    ASSERT_TRUE(t.update.assign[1]) << "transition " << t.id;
    EXPECT_EQ(t.update.assign[1]->kind(), ValueExpr::Kind::kMin);
  }
  EXPECT_TRUE(validate_monitor(m).empty());
}

TEST(CompileEnsuring, ConjunctSplitting) {
  const std::string phi2 = "achieve reach(5,10) ensuring avoid(4,6,4,6) and fuel_positive";
  EXPECT_EQ(compile_text(phi2).num_registers(), 3u);
  CompileOptions joined;
  joined.split_conjuncts = false;
  EXPECT_EQ(compile_text(phi2, joined).num_registers(), 2u);
  CompileOptions big;
  big.infinity = 42.0;
  const TaskMonitor m = compile_text(phi2, big);
  EXPECT_EQ(m.initial_valuation[1], 42.0);
  EXPECT_EQ(m.initial_valuation[2], 42.0);
}

TEST(CompileSeq, PhiThreeBody) {
  const TaskMonitor m = compile_text("achieve (reach(5,10); reach(5,0))");
  EXPECT_EQ(m.num_states, 4u);
  EXPECT_EQ(m.final_states(), std::vector<std::size_t>{3});
  EXPECT_TRUE(validate_monitor(m).empty());
}

// The running example: reach q then p while avoiding O and keeping fuel.
TEST(CompileSeq, RunningExampleGolden) {
  const TaskMonitor m =
      compile_text("achieve (reach(5,10); reach(5,0)) ensuring avoid(4,6,4,6) and fuel_positive");
  EXPECT_EQ(m.num_states, 4u);
  ASSERT_EQ(m.num_registers(), 4u);
  EXPECT_EQ(m.register_names, (std::vector<std::string>{"x1", "x2", "x3", "x4"}));
  const auto finals = m.final_states();
  ASSERT_EQ(finals.size(), 1u);
  const ValueExpr& rho = *m.reward[finals[0]];
  EXPECT_EQ(rho.kind(), ValueExpr::Kind::kMin);
  EXPECT_EQ(rho.terms().size(), 4u);
  EXPECT_EQ(registers_of(rho), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(validate_monitor(m).empty());

  const MonitorDepths d = longest_path_depths(m);
  std::vector<int> sorted = d.depth;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(d.max_depth, 3);

  // q1 -> q2 on reaching q, recording 1 - d(s, q) in x1.
  const auto first_exit = m.exits(m.initial_state);
  ASSERT_EQ(first_exit.size(), 1u);
  const Transition& t12 = m.transitions[first_exit[0]];
  EXPECT_EQ(t12.guard.kind(), Guard::Kind::kHolds);
  State at_q{5.0, 10.0, 7.0};
  Valuation v = m.initial_valuation;
  EXPECT_DOUBLE_EQ(t12.update.apply(at_q, v)[0], 1.0);
  // Hand-over q2 -> q3 requires the first goal's reward (x1) to be positive.
  const auto second_exit = m.exits(t12.target);
  ASSERT_EQ(second_exit.size(), 2u);
  const Transition& t23 = m.transitions[second_exit[0]];
  std::vector<std::size_t> read;
  t23.guard.collect_registers(read);
  EXPECT_EQ(read, std::vector<std::size_t>{0});
  // Self loops update both constraint registers.
  const Transition& loop = m.transitions[*m.self_loop(m.initial_state)];
  const Valuation after = loop.update.apply(State{3.0, 5.0, 6.5}, v);
  EXPECT_DOUBLE_EQ(after[2], 1.0);
  EXPECT_DOUBLE_EQ(after[3], 6.5);
}

TEST(CompileChoice, PhiFourInnerChoice) {
  const TaskMonitor m = compile_text("achieve reach(5,10) or achieve reach(10,0)");
  EXPECT_EQ(m.num_states, 3u);
  EXPECT_EQ(m.final_states().size(), 2u);
  EXPECT_EQ(m.num_registers(), 2u);
  EXPECT_TRUE(validate_monitor(m).empty());
  EXPECT_EQ(longest_path_depths(m).max_depth, 1);
}

TEST(CompileChoice, SymmetricCopy) {
  const auto& r = robot();
  std::mt19937_64 rng(1);
  const auto reg = toy_registry();
  for (int i = 0; i < 20; ++i) {
    const Spec s = random_spec(reg, rng, 3);
    const TaskMonitor single = compile(s);
    const TaskMonitor both = compile(Spec::choice(s, s));
    EXPECT_EQ(both.num_states, 2 * single.num_states - 1);
    EXPECT_TRUE(validate_monitor(both).empty());
  }
  (void)r;
}

TEST(Compile, BenchmarkGoldenCounts) {
  const std::string avoid = " ensuring avoid(4,6,4,6)";
  struct Golden {
    std::string text;
    std::size_t states;
    std::size_t registers;
    int depth;
  };
  const std::vector<Golden> golden = {
      {"achieve reach(5,10)" + avoid, 2, 2, 1},
      {"achieve reach(5,10)" + avoid + " and fuel_positive", 2, 3, 1},
      {"achieve (reach(5,10); reach(5,0))" + avoid, 4, 3, 3},
      {"(achieve reach(5,10) or achieve reach(10,0)); achieve reach(10,10)" + avoid, 5, 4, 3},
      {"achieve (reach(5,10); reach(5,0); reach(10,0))" + avoid, 6, 4, 5},
      {"achieve (reach(5,10); reach(5,0); reach(10,0); reach(10,10))" + avoid, 8, 5, 7},
      {"achieve (reach(5,10); reach(5,0); reach(10,0); reach(10,10); reach(0,0))" + avoid, 10, 6,
       9},
  };
  for (const auto& g : golden) {
    const TaskMonitor m = compile_text(g.text);
    EXPECT_EQ(m.num_states, g.states) << g.text;
    EXPECT_EQ(m.num_registers(), g.registers) << g.text;
    EXPECT_EQ(longest_path_depths(m).max_depth, g.depth) << g.text;
    EXPECT_TRUE(validate_monitor(m).empty()) << g.text;
  }
}

TEST(Compile, RandomSpecsAreValidWithPredictedSizes) {
  const auto reg = toy_registry();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const Spec s = random_spec(reg, rng, 1 + i % 5);
    for (bool split : {true, false}) {
      CompileOptions options;
      options.split_conjuncts = split;
      const TaskMonitor m = compile(s, options);
      const auto violations = validate_monitor(m);
      ASSERT_TRUE(violations.empty()) << print_spec(s) << ": " << violations.front().message;
      ASSERT_EQ(m.num_registers(), expected_registers(s, split)) << print_spec(s);
      ASSERT_EQ(m.num_states, expected_states(s)) << print_spec(s);
      std::set<std::string> names(m.register_names.begin(), m.register_names.end());
      ASSERT_EQ(names.size(), m.num_registers());
      for (std::size_t t = 0; t < m.transitions.size(); ++t) ASSERT_EQ(m.transitions[t].id, t);
    }
  }
}

// Boolean and quantitative guard readings agree on random (s, v).
TEST(Guards, BooleanIffQuantitativePositive) {
  const auto reg = toy_registry();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-1.0, 4.0);
  std::uniform_int_distribution<int> small(-3, 3);
  std::size_t checked = 0;
  for (int i = 0; i < 200; ++i) {
    const TaskMonitor m = compile(random_spec(reg, rng, 1 + i % 4));
    for (int k = 0; k < 20; ++k) {
      const State s{coord(rng), coord(rng)};
      Valuation v(m.num_registers());
      for (auto& x : v) x = k % 3 == 0 ? small(rng) : coord(rng);
      for (const auto& t : m.transitions) {
        const double q = t.guard.robustness(s, v, m.infinity);
        ASSERT_EQ(t.guard.eval(s, v), q > 0.0) << to_string(t.guard, m);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10000u);
}

TEST(Guards, AllIsMinimumAndTrueIsInfinity) {
  const auto reg = toy_registry();
  const Predicate pos = Predicate::atom(reg.find("pos"), {});
  const Guard g = Guard::all({Guard::holds(pos), Guard::positive(ValueExpr::reg(0))});
  const State s{3.0, 0.0};
  EXPECT_DOUBLE_EQ(g.robustness(s, Valuation{1.5}, 1e6), 1.5);
  EXPECT_DOUBLE_EQ(g.robustness(s, Valuation{7.0}, 1e6), 3.0);
  EXPECT_DOUBLE_EQ(Guard::always().robustness(s, Valuation{}, 123.0), 123.0);
  EXPECT_EQ(Guard::all({Guard::always(), Guard::holds(pos)}).kind(), Guard::Kind::kHolds);
}

TEST(Updates, SimultaneousAssignment) {
  Update u = Update::identity(2);
  u.assign[0] = ValueExpr::reg(1);
  u.assign[1] = ValueExpr::reg(0);
  EXPECT_EQ(u.apply(State{}, Valuation{1.0, 2.0}), (Valuation{2.0, 1.0}));
  EXPECT_TRUE(Update::identity(3).is_identity());
  EXPECT_FALSE(u.is_identity());
}

// Hand-built monitors for the validator.
TaskMonitor chain(std::size_t n) {
  TaskMonitor m;
  m.num_states = n;
  m.register_names = {"x"};
  m.initial_valuation = {0.0};
  for (std::size_t q = 0; q < n; ++q) {
    m.transitions.push_back({m.transitions.size(), q, q, Guard::always(), Update::identity(1)});
    if (q + 1 < n) {
      m.transitions.push_back({m.transitions.size(), q, q + 1, Guard::always(),
                               Update::identity(1)});
    }
  }
  m.is_final.assign(n, false);
  m.is_final[n - 1] = true;
  m.reward.assign(n, std::nullopt);
  m.reward[n - 1] = ValueExpr::reg(0);
  return m;
}

bool has(const std::vector<Violation>& vs, ViolationKind kind) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == kind; });
}

TEST(Validator, AcceptsChain) { EXPECT_TRUE(validate_monitor(chain(3)).empty()); }

TEST(Validator, DetectsTwoCycle) {
  TaskMonitor m = chain(3);
  m.transitions.push_back({m.transitions.size(), 1, 0, Guard::always(), Update::identity(1)});
  const auto vs = validate_monitor(m);
  EXPECT_TRUE(has(vs, ViolationKind::kCycle));
  EXPECT_THROW(longest_path_depths(m), InvalidMonitor);
}

TEST(Validator, DetectsMissingSelfLoop) {
  TaskMonitor m = chain(3);
  m.transitions.erase(m.transitions.begin() + 2);  // self loop of state 1
  for (std::size_t i = 0; i < m.transitions.size(); ++i) m.transitions[i].id = i;
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kMissingSelfLoop));
}

TEST(Validator, DetectsGuardedSelfLoop) {
  TaskMonitor m = chain(2);
  m.transitions[0].guard = Guard::positive(ValueExpr::reg(0));
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kMissingSelfLoop));
}

TEST(Validator, DetectsDuplicateEdge) {
  TaskMonitor m = chain(2);
  m.transitions.push_back({m.transitions.size(), 0, 1, Guard::always(), Update::identity(1)});
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kDuplicateEdge));
}

TEST(Validator, DetectsFinalMismatch) {
  TaskMonitor m = chain(3);
  m.is_final[1] = true;
  m.reward[1] = ValueExpr::reg(0);
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kFinalMismatch));
  TaskMonitor sink = chain(3);
  sink.is_final[2] = false;
  sink.reward[2] = std::nullopt;
  EXPECT_TRUE(has(validate_monitor(sink), ViolationKind::kFinalMismatch));
}

TEST(Validator, DetectsUnreachableAndDeadEnd) {
  TaskMonitor m = chain(3);
  m.num_states = 4;
  m.is_final.push_back(true);
  m.reward.push_back(ValueExpr::reg(0));
  m.transitions.push_back({m.transitions.size(), 3, 3, Guard::always(), Update::identity(1)});
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kUnreachable));

  TaskMonitor dead = chain(2);
  dead.is_final = {false, false};
  dead.reward = {std::nullopt, std::nullopt};
  EXPECT_TRUE(has(validate_monitor(dead), ViolationKind::kDeadEnd));
}

TEST(Validator, DetectsMalformed) {
  TaskMonitor m = chain(2);
  m.transitions[1].target = 9;
  EXPECT_TRUE(has(validate_monitor(m), ViolationKind::kMalformed));
  TaskMonitor reads = chain(2);
  reads.reward[1] = ValueExpr::reg(5);
  EXPECT_TRUE(has(validate_monitor(reads), ViolationKind::kMalformed));
  TaskMonitor sizes = chain(2);
  sizes.initial_valuation = {};
  EXPECT_TRUE(has(validate_monitor(sizes), ViolationKind::kMalformed));
}

TEST(Depths, SmallMonitors) {
  const MonitorDepths a = longest_path_depths(compile_text("achieve reach(1,1)"));
  EXPECT_EQ(a.depth, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.max_depth, 1);
  // Longest, not shortest: a skip edge does not shorten depth.
  TaskMonitor m = chain(3);
  m.transitions.push_back({m.transitions.size(), 0, 2, Guard::always(), Update::identity(1)});
  EXPECT_EQ(longest_path_depths(m).depth, (std::vector<int>{0, 1, 2}));
}

TEST(Dot, MentionsStatesGuardsAndRewards) {
  const TaskMonitor m = compile_text("achieve reach(5,10) ensuring avoid(4,6,4,6)");
  const std::string dot = to_dot(m);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_NE(dot.find("q0"), std::string::npos);
  EXPECT_NE(dot.find("q1"), std::string::npos);
  EXPECT_NE(dot.find("rho"), std::string::npos);
  EXPECT_NE(dot.find("reach(5,10)"), std::string::npos);
  EXPECT_EQ(std::count(dot.begin(), dot.end(), '{'), std::count(dot.begin(), dot.end(), '}'));
}

TEST(Fingerprint, StableAndDiscriminating) {
  const std::string a = "achieve reach(5,10) ensuring avoid(4,6,4,6)";
  EXPECT_EQ(fingerprint(compile_text(a)), fingerprint(compile_text(a)));
  EXPECT_NE(fingerprint(compile_text(a)),
            fingerprint(compile_text("achieve reach(5,11) ensuring avoid(4,6,4,6)")));
  CompileOptions joined;
  joined.split_conjuncts = false;
  const std::string b = a + " and fuel_positive";
  EXPECT_NE(fingerprint(compile_text(b)), fingerprint(compile_text(b, joined)));
}

}  // namespace
}  // namespace taskspec
