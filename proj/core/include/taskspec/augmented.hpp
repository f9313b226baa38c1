#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "taskspec/env.hpp"
#include "taskspec/monitor.hpp"
#include "taskspec/semantics.hpp"

namespace taskspec {

// (s, q, v): environment state, monitor state, register valuation.
struct AugmentedState {
  State env;
  std::size_t monitor_state = 0;
  Valuation registers;
};

// Environment action plus the id of the monitor transition to take.
struct AugmentedAction {
  Action env;
  std::size_t transition = 0;
};

struct AugmentedRollout {
  std::vector<AugmentedState> states;
  std::vector<AugmentedAction> actions;

  std::size_t length() const { return states.empty() ? 0 : states.size() - 1; }
  // Drops monitor states and registers.
  Rollout project() const;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

AugmentedState reset(const Environment& env, const TaskMonitor& monitor, Rng& rng);

// Transitions leaving the current monitor state whose guard holds at (s, v),
// in id order. Never empty for a valid monitor: the self loop is always on.
std::vector<std::size_t> enabled_transitions(const AugmentedState& state,
                                             const TaskMonitor& monitor);

// Moves the environment with action.env and the monitor along
// action.transition. Registers become u(s, v) for the pre-step state s.
// Throws ContractViolation if the transition does not leave the current
// monitor state or its guard is false.
AugmentedState step(const AugmentedState& state, const AugmentedAction& action,
                    const Environment& env, const TaskMonitor& monitor, Rng& rng);

// rho(s_T, q_T, v_T) when q_T is final; nullopt (bottom) otherwise.
std::optional<double> terminal_reward(const AugmentedRollout& rollout,
                                      const TaskMonitor& monitor);

// Max quantitative guard value over the non-self exits of q. Throws
// std::invalid_argument at a final state.
double alpha(const AugmentedState& state, const TaskMonitor& monitor);

struct ShapingConstants {
  double c_lower = 0.0;  // strictly below every final reward
  double c_upper = 0.0;  // >= |alpha| at every non-final augmented state
  MonitorDepths depths;
};

struct ShapingOverrides {
  std::optional<double> c_lower;
  std::optional<double> c_upper;
};

// Bounds derived from the predicates' magnitude bounds over `box`: every
// guard value and register content is a min/max of atomic robustness values
// seen inside the box, so |alpha| <= B and rho >= -B for B the largest atomic
// bound. c_lower = -(B + 1). Falls back to the monitor's infinity when some
// predicate has no bound.
ShapingConstants shaping_constants(const TaskMonitor& monitor, const StateBox& box,
                                   const ShapingOverrides& overrides = {});

// Terminal reward if q_T is final. Otherwise
//   max_{i <= j < T} alpha(s_j, q_T, v_j) + 2 C_u (d_{q_T} - D) + C_l
// with i the first index of the final run of q_T. When that run is only the
// last state (i == T), alpha(s_T, q_T, v_T) stands in for the empty max.
double shaped_reward(const AugmentedRollout& rollout, const TaskMonitor& monitor,
                     const ShapingConstants& constants);

// Streaming form of shaped_reward / terminal_reward for the training loop.
class RewardTracker {
 public:
  RewardTracker(const TaskMonitor& monitor, const ShapingConstants& constants);

  void begin(const AugmentedState& s0);
  // Call with the pre-step state, then the post-step state.
  void observe_step(const AugmentedState& before, const AugmentedState& after);
  double shaped(const AugmentedState& last) const;
  std::optional<double> terminal(const AugmentedState& last) const;
  // Largest |alpha| observed; compare against C_u.
  double max_abs_alpha() const { return max_abs_alpha_; }

 private:
  const TaskMonitor& monitor_;
  const ShapingConstants& constants_;
  double run_max_ = 0.0;
  bool run_empty_ = true;
  double max_abs_alpha_ = 0.0;
};

class AugmentedPolicy {
 public:
  virtual ~AugmentedPolicy() = default;
  // Must return an enabled transition.
  virtual AugmentedAction act(const AugmentedState& state, const TaskMonitor& monitor) const = 0;
};

AugmentedRollout run_episode(const Environment& env, const TaskMonitor& monitor,
                             const AugmentedPolicy& policy, Rng& rng);

// Environment policy with internal (q, v) memory, initialized to (q_0, v_0)
// and advanced by the chosen transition after every action.
class ProjectedPolicy {
 public:
  ProjectedPolicy(std::shared_ptr<const AugmentedPolicy> policy,
                  std::shared_ptr<const TaskMonitor> monitor);

  void reset();
  Action operator()(StateView s);

  std::size_t monitor_state() const { return q_; }
  const Valuation& registers() const { return v_; }

 private:
  std::shared_ptr<const AugmentedPolicy> policy_;
  std::shared_ptr<const TaskMonitor> monitor_;
  std::size_t q_ = 0;
  Valuation v_;
};

ProjectedPolicy project_policy(std::shared_ptr<const AugmentedPolicy> policy,
                               std::shared_ptr<const TaskMonitor> monitor);

// One tab-separated line per time step:
//   t, env state..., monitor state, registers..., transition id, env action...
// The final line stops after the registers.
void write_trace(std::ostream& out, const AugmentedRollout& rollout);

// Reads the first 1 + state_dim columns of each line (t, env state).
Rollout read_trace(std::istream& in, std::size_t state_dim);

}  // namespace taskspec
