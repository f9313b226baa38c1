#include "taskspec/augmented.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace taskspec {

Rollout AugmentedRollout::project() const {
  Rollout r;
  r.states.reserve(states.size());
  for (const auto& s : states) r.states.push_back(s.env);
  r.actions.reserve(actions.size());
  for (const auto& a : actions) r.actions.push_back(a.env);
  return r;
}

AugmentedState reset(const Environment& env, const TaskMonitor& monitor, Rng& rng) {
  return {env.initial_state(rng), monitor.initial_state, monitor.initial_valuation};
}

std::vector<std::size_t> enabled_transitions(const AugmentedState& state,
                                             const TaskMonitor& monitor) {
  std::vector<std::size_t> out;
  for (const auto& t : monitor.transitions) {
    if (t.source == state.monitor_state && t.guard.eval(state.env, state.registers)) {
      out.push_back(t.id);
    }
  }
  return out;
}

AugmentedState step(const AugmentedState& state, const AugmentedAction& action,
                    const Environment& env, const TaskMonitor& monitor, Rng& rng) {
  if (action.transition >= monitor.transitions.size()) {
    throw ContractViolation(fmt::format("unknown transition {}", action.transition));
  }
  const auto& t = monitor.transitions[action.transition];
  if (t.source != state.monitor_state) {
    throw ContractViolation(fmt::format("transition {} leaves state {}, not {}", t.id,
                                        t.source, state.monitor_state));
  }
  if (!t.guard.eval(state.env, state.registers)) {
    throw ContractViolation(fmt::format("transition {} is disabled here", t.id));
  }
  AugmentedState next;
  next.env = env.step(state.env, action.env, rng);
  next.monitor_state = t.target;
  next.registers = t.update.apply(state.env, state.registers);
  return next;
}

std::optional<double> terminal_reward(const AugmentedRollout& rollout,
                                      const TaskMonitor& monitor) {
  const auto& last = rollout.states.back();
  if (!monitor.is_final[last.monitor_state]) return std::nullopt;
  return monitor.reward[last.monitor_state]->eval(last.env, last.registers);
}

double alpha(const AugmentedState& state, const TaskMonitor& monitor) {
  if (monitor.is_final[state.monitor_state]) {
    throw std::invalid_argument("alpha is undefined at a final monitor state");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : monitor.transitions) {
    if (t.source != state.monitor_state || t.is_self_loop()) continue;
    best = std::max(best, t.guard.robustness(state.env, state.registers, monitor.infinity));
  }
  return best;
}

namespace {

double expr_bound(const ValueExpr& e, const StateBox& box, double register_bound) {
  switch (e.kind()) {
    case ValueExpr::Kind::kConst: return std::abs(e.value());
    case ValueExpr::Kind::kRegister: return register_bound;
    case ValueExpr::Kind::kRobustness: return e.predicate().magnitude_bound(box);
    case ValueExpr::Kind::kMin: {
      double b = 0.0;
      for (const auto& t : e.terms()) b = std::max(b, expr_bound(t, box, register_bound));
      return b;
    }
  }
  return std::numeric_limits<double>::infinity();
}

double guard_bound(const Guard& g, const StateBox& box, double register_bound,
                   double infinity) {
  switch (g.kind()) {
    case Guard::Kind::kTrue: return infinity;
    case Guard::Kind::kHolds: return g.predicate().magnitude_bound(box);
    case Guard::Kind::kPositive: return expr_bound(g.expr(), box, register_bound);
    case Guard::Kind::kAll: {
      double b = 0.0;
      for (const auto& op : g.operands()) {
        b = std::max(b, guard_bound(op, box, register_bound, infinity));
      }
      return b;
    }
  }
  return infinity;
}

void collect_guard_predicates(const Guard& g, std::vector<Predicate>& out) {
  switch (g.kind()) {
    case Guard::Kind::kHolds: out.push_back(g.predicate()); break;
    case Guard::Kind::kPositive: g.expr().collect_predicates(out); break;
    case Guard::Kind::kAll:
      for (const auto& op : g.operands()) collect_guard_predicates(op, out);
      break;
    case Guard::Kind::kTrue: break;
  }
}

}  // namespace

ShapingConstants shaping_constants(const TaskMonitor& monitor, const StateBox& box,
                                   const ShapingOverrides& overrides) {
  ShapingConstants c;
  c.depths = longest_path_depths(monitor);

  std::vector<Predicate> atoms;
  for (const auto& t : monitor.transitions) {
    collect_guard_predicates(t.guard, atoms);
    for (const auto& a : t.update.assign) {
      if (a) a->collect_predicates(atoms);
    }
  }
  double register_bound = 0.0;
  for (const auto& p : atoms) register_bound = std::max(register_bound, p.magnitude_bound(box));
  const bool bounded = std::isfinite(register_bound) && register_bound < monitor.infinity;

  double alpha_bound = 0.0;
  for (const auto& t : monitor.transitions) {
    if (t.is_self_loop() || monitor.is_final[t.source]) continue;
    alpha_bound = std::max(alpha_bound,
                           guard_bound(t.guard, box, register_bound, monitor.infinity));
  }
  c.c_upper = bounded && std::isfinite(alpha_bound) ? alpha_bound : monitor.infinity;
  c.c_lower = bounded ? -(register_bound + 1.0) : -monitor.infinity;
  if (overrides.c_upper) c.c_upper = *overrides.c_upper;
  if (overrides.c_lower) c.c_lower = *overrides.c_lower;
  if (c.c_upper < 0.0) throw std::invalid_argument("C_u must be non-negative");
  return c;
}

double shaped_reward(const AugmentedRollout& rollout, const TaskMonitor& monitor,
                     const ShapingConstants& constants) {
  if (auto r = terminal_reward(rollout, monitor)) return *r;
  const std::size_t big_t = rollout.length();
  const std::size_t q_t = rollout.states[big_t].monitor_state;
  std::size_t first = big_t;
  while (first > 0 && rollout.states[first - 1].monitor_state == q_t) --first;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = first; j < big_t; ++j) {
    best = std::max(best, alpha(rollout.states[j], monitor));
  }
  if (first == big_t) best = alpha(rollout.states[big_t], monitor);
  return best +
         2.0 * constants.c_upper * (constants.depths.depth[q_t] - constants.depths.max_depth) +
         constants.c_lower;
}

RewardTracker::RewardTracker(const TaskMonitor& monitor, const ShapingConstants& constants)
    : monitor_(monitor), constants_(constants) {}

void RewardTracker::begin(const AugmentedState&) {
  run_empty_ = true;
  run_max_ = -std::numeric_limits<double>::infinity();
  max_abs_alpha_ = 0.0;
}

void RewardTracker::observe_step(const AugmentedState& before, const AugmentedState& after) {
  if (before.monitor_state != after.monitor_state) {
    run_empty_ = true;
    run_max_ = -std::numeric_limits<double>::infinity();
    return;
  }
  if (monitor_.is_final[before.monitor_state]) return;
  const double a = alpha(before, monitor_);
  max_abs_alpha_ = std::max(max_abs_alpha_, std::abs(a));
  run_max_ = std::max(run_max_, a);
  run_empty_ = false;
}

std::optional<double> RewardTracker::terminal(const AugmentedState& last) const {
  if (!monitor_.is_final[last.monitor_state]) return std::nullopt;
  return monitor_.reward[last.monitor_state]->eval(last.env, last.registers);
}

double RewardTracker::shaped(const AugmentedState& last) const {
  if (auto r = terminal(last)) return *r;
  const double best = run_empty_ ? alpha(last, monitor_) : run_max_;
  return best +
         2.0 * constants_.c_upper *
             (constants_.depths.depth[last.monitor_state] - constants_.depths.max_depth) +
         constants_.c_lower;
}

AugmentedRollout run_episode(const Environment& env, const TaskMonitor& monitor,
                             const AugmentedPolicy& policy, Rng& rng) {
  AugmentedRollout r;
  r.states.reserve(env.horizon() + 1);
  r.actions.reserve(env.horizon());
  r.states.push_back(reset(env, monitor, rng));
  for (int t = 0; t < env.horizon(); ++t) {
    r.actions.push_back(policy.act(r.states.back(), monitor));
    r.states.push_back(step(r.states.back(), r.actions.back(), env, monitor, rng));
  }
  return r;
}

ProjectedPolicy::ProjectedPolicy(std::shared_ptr<const AugmentedPolicy> policy,
                                 std::shared_ptr<const TaskMonitor> monitor)
    : policy_(std::move(policy)), monitor_(std::move(monitor)) {
  reset();
}

void ProjectedPolicy::reset() {
  q_ = monitor_->initial_state;
  v_ = monitor_->initial_valuation;
}

Action ProjectedPolicy::operator()(StateView s) {
  AugmentedState current{State(s.begin(), s.end()), q_, v_};
  AugmentedAction a = policy_->act(current, *monitor_);
  const auto& t = monitor_->transitions.at(a.transition);
  if (t.source != q_ || !t.guard.eval(s, v_)) {
    throw ContractViolation("policy chose a disabled transition");
  }
  v_ = t.update.apply(s, v_);
  q_ = t.target;
  return std::move(a.env);
}

ProjectedPolicy project_policy(std::shared_ptr<const AugmentedPolicy> policy,
                               std::shared_ptr<const TaskMonitor> monitor) {
  return ProjectedPolicy(std::move(policy), std::move(monitor));
}

void write_trace(std::ostream& out, const AugmentedRollout& rollout) {
  for (std::size_t t = 0; t < rollout.states.size(); ++t) {
    const auto& s = rollout.states[t];
    std::string line = fmt::format("{}", t);
    for (double x : s.env) line += fmt::format("\t{}", x);
    line += fmt::format("\t{}", s.monitor_state);
    for (double x : s.registers) line += fmt::format("\t{}", x);
    if (t < rollout.actions.size()) {
      const auto& a = rollout.actions[t];
      line += fmt::format("\t{}", a.transition);
      for (double x : a.env) line += fmt::format("\t{}", x);
    }
    out << line << '\n';
  }
}

Rollout read_trace(std::istream& in, std::size_t state_dim) {
  Rollout r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<double> values;
    while (values.size() < state_dim + 1 && std::getline(fields, field, '\t')) {
      double v = 0.0;
      const auto* end = field.data() + field.size();
      const auto res = std::from_chars(field.data(), end, v);
      if (res.ec != std::errc{} || res.ptr != end) {
        throw std::runtime_error(
            fmt::format("trace line {}: malformed number '{}'", line_no, field));
      }
      values.push_back(v);
    }
    if (values.size() != state_dim + 1) {
      throw std::runtime_error(fmt::format("trace line {}: expected {} leading columns",
                                           line_no, state_dim + 1));
    }
    if (values[0] != static_cast<double>(r.states.size())) {
      throw std::runtime_error(fmt::format("trace line {}: time step {} out of order", line_no,
                                           values[0]));
    }
    r.states.emplace_back(values.begin() + 1, values.end());
  }
  if (r.states.empty()) throw std::runtime_error("trace is empty");
  return r;
}

}  // namespace taskspec
