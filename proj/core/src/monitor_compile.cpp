// Recursive task-monitor construction: one rule per specification operator.

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "taskspec/monitor.hpp"

namespace taskspec {
namespace {

std::string fresh_name(const std::string& base, std::set<std::string>& taken) {
  if (taken.insert(base).second) return base;
  for (int k = 2;; ++k) {
    auto candidate = fmt::format("{}_{}", base, k);
    if (taken.insert(candidate).second) return candidate;
  }
}

void add_transition(TaskMonitor& m, std::size_t source, std::size_t target, Guard guard,
                    Update update) {
  Transition t;
  t.id = m.transitions.size();
  t.source = source;
  t.target = target;
  t.guard = std::move(guard);
  t.update = std::move(update);
  m.transitions.push_back(std::move(t));
}

Update remap_update(const Update& u, std::span<const std::size_t> mapping,
                    std::size_t registers) {
  Update out = Update::identity(registers);
  for (std::size_t r = 0; r < u.assign.size(); ++r) {
    if (u.assign[r]) out.assign[mapping[r]] = u.assign[r]->remap(mapping);
  }
  return out;
}

std::vector<std::size_t> offset_mapping(std::size_t count, std::size_t offset) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), offset);
  return out;
}

void check_distinct(const std::vector<std::string>& names) {
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) {
    throw std::logic_error("register name collision after renaming");
  }
}

}  // namespace

TaskMonitor compile_achieve(const Predicate& goal, const CompileOptions& options) {
  TaskMonitor m;
  m.num_states = 2;
  m.initial_state = 0;
  m.register_names = {"x"};
  m.initial_valuation = {0.0};
  m.infinity = options.infinity;
  add_transition(m, 0, 0, Guard::always(), Update::identity(1));
  Update record = Update::identity(1);
  record.assign[0] = ValueExpr::robustness(goal);
  add_transition(m, 0, 1, Guard::holds(goal), std::move(record));
  add_transition(m, 1, 1, Guard::always(), Update::identity(1));
  m.is_final = {false, true};
  m.reward = {std::nullopt, ValueExpr::reg(0)};
  return m;
}

TaskMonitor compile_ensuring(const TaskMonitor& body, const Predicate& constraint,
                             const CompileOptions& options) {
  const auto parts =
      options.split_conjuncts ? constraint.conjuncts() : std::vector<Predicate>{constraint};
  TaskMonitor m = body;
  m.infinity = options.infinity;
  std::set<std::string> taken(m.register_names.begin(), m.register_names.end());
  std::vector<std::size_t> added;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    added.push_back(m.register_names.size());
    m.register_names.push_back(fresh_name("x_b", taken));
    m.initial_valuation.push_back(options.infinity);
  }
  check_distinct(m.register_names);
  for (auto& t : m.transitions) {
    t.update.assign.resize(m.num_registers());
    for (std::size_t k = 0; k < parts.size(); ++k) {
      t.update.assign[added[k]] = ValueExpr::min(
          {ValueExpr::reg(added[k]), ValueExpr::robustness(parts[k])});
    }
  }
  for (auto& r : m.reward) {
    if (!r) continue;
    std::vector<ValueExpr> terms{*r};
    for (auto idx : added) terms.push_back(ValueExpr::reg(idx));
    r = ValueExpr::min(std::move(terms));
  }
  return m;
}

// The second monitor's registers are embedded into the first one's (slot j of
// `second` reuses slot j of `first`, growing the set if needed), plus one
// register x_R holding the first monitor's reward at hand-over.
TaskMonitor compile_seq(const TaskMonitor& first, const TaskMonitor& second) {
  const std::size_t n1 = first.num_states;
  const std::size_t r1 = first.num_registers();
  const std::size_t r2 = second.num_registers();
  const std::size_t shared = std::max(r1, r2);
  const std::size_t x_r = shared;
  const std::size_t regs = shared + 1;

  TaskMonitor m;
  m.num_states = n1 + second.num_states;
  m.initial_state = first.initial_state;
  m.infinity = std::max(first.infinity, second.infinity);

  std::set<std::string> taken(first.register_names.begin(), first.register_names.end());
  m.register_names = first.register_names;
  for (std::size_t j = r1; j < r2; ++j) {
    m.register_names.push_back(fresh_name(second.register_names[j], taken));
  }
  m.register_names.push_back(fresh_name("x_R", taken));
  check_distinct(m.register_names);

  m.initial_valuation = first.initial_valuation;
  m.initial_valuation.resize(regs, 0.0);

  const auto ident1 = offset_mapping(r1, 0);
  const auto ident2 = offset_mapping(r2, 0);

  for (const auto& t : first.transitions) {
    add_transition(m, t.source, t.target, t.guard, remap_update(t.update, ident1, regs));
  }
  for (const auto& t : second.transitions) {
    add_transition(m, t.source + n1, t.target + n1, t.guard.remap(ident2),
                   remap_update(t.update, ident2, regs));
  }

  // Hand-over edges: from each final state of `first`, take any transition of
  // `second`'s initial state (its self loop included) in the same step,
  // reading `second`'s initial valuation.
  const ValuationView v2 = second.initial_valuation;
  for (auto f : first.final_states()) {
    const ValueExpr done = *first.reward[f];
    for (auto id : second.outgoing(second.initial_state)) {
      const auto& t = second.transitions[id];
      Guard guard = Guard::all({t.guard.bind(v2), Guard::positive(done)});
      Update update = Update::identity(regs);
      for (std::size_t r = 0; r < regs; ++r) {
        if (r < r2) {
          update.assign[r] = t.update.assign[r] ? t.update.assign[r]->bind(v2)
                                                : ValueExpr::constant(v2[r]);
        } else if (r == x_r) {
          update.assign[r] = done;
        } else {
          update.assign[r] = ValueExpr::constant(0.0);
        }
      }
      add_transition(m, f, t.target + n1, std::move(guard), std::move(update));
    }
  }

  m.is_final.assign(m.num_states, false);
  m.reward.assign(m.num_states, std::nullopt);
  for (auto f : second.final_states()) {
    m.is_final[f + n1] = true;
    m.reward[f + n1] = ValueExpr::min({second.reward[f]->remap(ident2), ValueExpr::reg(x_r)});
  }
  return m;
}

// Both initial states merge into a fresh state 0. Transitions of one branch
// reset the other branch's registers to 0.
TaskMonitor compile_choice(const TaskMonitor& left, const TaskMonitor& right) {
  const std::size_t r1 = left.num_registers();
  const std::size_t r2 = right.num_registers();
  const std::size_t regs = r1 + r2;

  std::vector<std::size_t> state1(left.num_states);
  std::vector<std::size_t> state2(right.num_states);
  std::size_t next = 1;
  for (std::size_t q = 0; q < left.num_states; ++q) {
    state1[q] = q == left.initial_state ? 0 : next++;
  }
  for (std::size_t q = 0; q < right.num_states; ++q) {
    state2[q] = q == right.initial_state ? 0 : next++;
  }

  TaskMonitor m;
  m.num_states = next;
  m.initial_state = 0;
  m.infinity = std::max(left.infinity, right.infinity);

  std::set<std::string> taken(left.register_names.begin(), left.register_names.end());
  m.register_names = left.register_names;
  for (const auto& name : right.register_names) {
    m.register_names.push_back(fresh_name(name, taken));
  }
  check_distinct(m.register_names);
  m.initial_valuation = left.initial_valuation;
  m.initial_valuation.insert(m.initial_valuation.end(), right.initial_valuation.begin(),
                             right.initial_valuation.end());

  const auto map1 = offset_mapping(r1, 0);
  const auto map2 = offset_mapping(r2, r1);
  const auto self1 = left.self_loop(left.initial_state);
  const auto self2 = right.self_loop(right.initial_state);
  if (!self1 || !self2) throw InvalidMonitor("choice operands need self loops on initial states");

  Update merged = remap_update(left.transitions[*self1].update, map1, regs);
  const Update second_half = remap_update(right.transitions[*self2].update, map2, regs);
  for (std::size_t r = r1; r < regs; ++r) merged.assign[r] = second_half.assign[r];
  add_transition(m, 0, 0, Guard::always(), std::move(merged));

  const auto branch = [&](const TaskMonitor& src, std::span<const std::size_t> states,
                          std::span<const std::size_t> map, std::size_t lo, std::size_t hi) {
    for (const auto& t : src.transitions) {
      if (t.source == src.initial_state && t.is_self_loop()) continue;
      Update u = remap_update(t.update, map, regs);
      for (std::size_t r = 0; r < regs; ++r) {
        if (r < lo || r >= hi) u.assign[r] = ValueExpr::constant(0.0);
      }
      add_transition(m, states[t.source], states[t.target], t.guard.remap(map), std::move(u));
    }
  };
  branch(left, state1, map1, 0, r1);
  branch(right, state2, map2, r1, regs);

  m.is_final.assign(m.num_states, false);
  m.reward.assign(m.num_states, std::nullopt);
  for (auto f : left.final_states()) {
    m.is_final[state1[f]] = true;
    m.reward[state1[f]] = left.reward[f]->remap(map1);
  }
  for (auto f : right.final_states()) {
    m.is_final[state2[f]] = true;
    m.reward[state2[f]] = right.reward[f]->remap(map2);
  }
  return m;
}

namespace {

TaskMonitor build(const Spec& spec, const CompileOptions& options) {
  switch (spec.kind()) {
    case Spec::Kind::kAchieve: return compile_achieve(spec.predicate(), options);
    case Spec::Kind::kEnsuring:
      return compile_ensuring(build(spec.body(), options), spec.predicate(), options);
    case Spec::Kind::kSeq:
      return compile_seq(build(spec.left(), options), build(spec.right(), options));
    case Spec::Kind::kChoice:
      return compile_choice(build(spec.left(), options), build(spec.right(), options));
  }
  throw std::logic_error("unknown specification node");
}

}  // namespace

TaskMonitor compile(const Spec& spec, const CompileOptions& options) {
  TaskMonitor m = build(spec, options);
  for (std::size_t r = 0; r < m.num_registers(); ++r) {
    m.register_names[r] = fmt::format("x{}", r + 1);
  }
  return m;
}

}  // namespace taskspec
