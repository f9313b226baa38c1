#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskspec/predicate.hpp"
#include "taskspec/spec.hpp"

namespace taskspec {

using Valuation = std::vector<double>;
using ValuationView = std::span<const double>;

// Stand-in for +inf in register arithmetic.
inline constexpr double kDefaultInfinity = 1e6;

// Real-valued expression over (environment state, registers).
class ValueExpr {
 public:
  enum class Kind { kConst, kRegister, kRobustness, kMin };

  static ValueExpr constant(double value);
  static ValueExpr reg(std::size_t index);
  static ValueExpr robustness(Predicate predicate);
  // Flattens nested mins.
  static ValueExpr min(std::vector<ValueExpr> terms);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  std::size_t register_index() const { return register_; }
  const Predicate& predicate() const { return *predicate_; }
  const std::vector<ValueExpr>& terms() const { return terms_; }

  double eval(StateView s, ValuationView v) const;

  // Register i becomes register mapping[i].
  ValueExpr remap(std::span<const std::size_t> mapping) const;
  // Every register read is replaced by the corresponding constant.
  ValueExpr bind(ValuationView values) const;
  bool reads_registers() const;
  void collect_registers(std::vector<std::size_t>& out) const;
  void collect_predicates(std::vector<Predicate>& out) const;

  friend bool operator==(const ValueExpr& a, const ValueExpr& b);

 private:
  ValueExpr() = default;
  Kind kind_ = Kind::kConst;
  double value_ = 0.0;
  std::size_t register_ = 0;
  std::optional<Predicate> predicate_;
  std::vector<ValueExpr> terms_;
};

// Transition condition over (state, registers). Has a Boolean reading and a
// quantitative one; holds(s, v) == (robustness(s, v) > 0).
class Guard {
 public:
  enum class Kind { kTrue, kHolds, kPositive, kAll };

  static Guard always();
  static Guard holds(Predicate predicate);
  // e > 0; quantitative value is e itself.
  static Guard positive(ValueExpr expr);
  // Conjunction; quantitative value is the min. Drops `true` operands and
  // flattens nested conjunctions.
  static Guard all(std::vector<Guard> operands);

  Kind kind() const { return kind_; }
  const Predicate& predicate() const { return *predicate_; }
  const ValueExpr& expr() const { return *expr_; }
  const std::vector<Guard>& operands() const { return operands_; }

  bool eval(StateView s, ValuationView v) const;
  // `infinity` is the value of the `true` guard.
  double robustness(StateView s, ValuationView v, double infinity) const;

  Guard remap(std::span<const std::size_t> mapping) const;
  Guard bind(ValuationView values) const;
  void collect_registers(std::vector<std::size_t>& out) const;

  friend bool operator==(const Guard& a, const Guard& b);

 private:
  Guard() = default;
  Kind kind_ = Kind::kTrue;
  std::optional<Predicate> predicate_;
  std::optional<ValueExpr> expr_;
  std::vector<Guard> operands_;
};

// Simultaneous register assignment; unassigned registers keep their value.
// Every right-hand side reads the pre-update valuation.
struct Update {
  std::vector<std::optional<ValueExpr>> assign;

  static Update identity(std::size_t registers);
  bool is_identity() const;
  Valuation apply(StateView s, ValuationView v) const;
  void apply_into(StateView s, ValuationView v, std::span<double> out) const;
};

struct Transition {
  std::size_t id = 0;
  std::size_t source = 0;
  std::size_t target = 0;
  Guard guard = Guard::always();
  Update update;

  bool is_self_loop() const { return source == target; }
};

// States 0..num_states-1; registers 0..register_names.size()-1. Transition
// ids equal their index in `transitions` and follow construction order.
struct TaskMonitor {
  std::size_t num_states = 0;
  std::size_t initial_state = 0;
  std::vector<std::string> register_names;
  Valuation initial_valuation;
  std::vector<Transition> transitions;
  std::vector<bool> is_final;
  // Reward per state; engaged exactly for final states.
  std::vector<std::optional<ValueExpr>> reward;
  double infinity = kDefaultInfinity;

  std::size_t num_registers() const { return register_names.size(); }
  // Ids of transitions leaving q, in id order.
  std::vector<std::size_t> outgoing(std::size_t q) const;
  // Non-self outgoing transition ids of q, in id order. Their position is the
  // policy's selection-score slot.
  std::vector<std::size_t> exits(std::size_t q) const;
  std::optional<std::size_t> self_loop(std::size_t q) const;
  std::vector<std::size_t> final_states() const;
};

struct CompileOptions {
  // One constraint register per top-level conjunct of an ensuring predicate.
  bool split_conjuncts = true;
  double infinity = kDefaultInfinity;
};

TaskMonitor compile_achieve(const Predicate& goal, const CompileOptions& options = {});
TaskMonitor compile_ensuring(const TaskMonitor& body, const Predicate& constraint,
                             const CompileOptions& options = {});
TaskMonitor compile_seq(const TaskMonitor& first, const TaskMonitor& second);
TaskMonitor compile_choice(const TaskMonitor& left, const TaskMonitor& right);
TaskMonitor compile(const Spec& spec, const CompileOptions& options = {});

enum class ViolationKind {
  kMalformed,          // dangling ids, size mismatches, bad register reads
  kCycle,              // cycle other than a self loop
  kFinalMismatch,      // final states != sinks (modulo self loops)
  kUnreachable,        // state not reachable from the initial state
  kDeadEnd,            // no final state reachable
  kDuplicateEdge,      // more than one transition for a state pair
  kMissingSelfLoop,    // no `true` self loop
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

std::string to_string(ViolationKind kind);

// Structural well-formedness of a monitor. Empty iff valid.
std::vector<Violation> validate_monitor(const TaskMonitor& monitor);

class InvalidMonitor : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MonitorDepths {
  std::vector<int> depth;  // longest path from the initial state, self loops ignored
  int max_depth = 0;
};

// Throws InvalidMonitor when the graph has a non-trivial cycle.
MonitorDepths longest_path_depths(const TaskMonitor& monitor);

std::string to_string(const ValueExpr& e, const TaskMonitor& monitor);
std::string to_string(const Guard& g, const TaskMonitor& monitor);

// Graphviz rendering: states carry rewards, edges carry guards and updates.
std::string to_dot(const TaskMonitor& monitor);

// Stable 64-bit hash of the monitor's full structure.
std::uint64_t fingerprint(const TaskMonitor& monitor);

}  // namespace taskspec
