#pragma once

#include <stdexcept>
#include <vector>

#include "taskspec/spec.hpp"

namespace taskspec {

using State = std::vector<double>;
using Action = std::vector<double>;

// s_0 -a_0-> s_1 ... -a_{t-1}-> s_t. length() == t.
struct Rollout {
  std::vector<State> states;
  std::vector<Action> actions;

  std::size_t length() const { return states.empty() ? 0 : states.size() - 1; }
};

// Reference semantics over finite rollouts. Temporal operators range over
// indices i < t: the last state s_t is never inspected. Seq splits at i < t
// into windows [0, i] and [i, t]. A length-0 rollout satisfies no Achieve.
//
// Evaluated by memoized recursion over (node, window); intended as an oracle
// and as the TLTL reward, not the monitor-based training path.
bool eval_bool(const Spec& spec, const Rollout& rollout);

class UndefinedRobustness : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// max/min recursion. Throws UndefinedRobustness for a length-0 rollout, where
// the value would be a max over an empty index set.
double eval_quant(const Spec& spec, const Rollout& rollout);

}  // namespace taskspec
