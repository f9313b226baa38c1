#include "taskspec/semantics.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace taskspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Window [i, j] denotes the sub-rollout s_i ... s_j (length j - i).
template <typename Value, typename Policy>
class WindowEvaluator {
 public:
  WindowEvaluator(const Spec& root, const std::vector<State>& states)
      : states_(states), n_(states.size()) {
    index(root);
  }

  Value eval(const Spec& s, std::size_t i, std::size_t j) {
    auto& table = memo_[s.id()];
    auto& slot = table[i * n_ + j];
    if (slot.known) return slot.value;
    slot.value = compute(s, i, j);
    slot.known = true;
    return slot.value;
  }

 private:
  struct Slot {
    Value value{};
    bool known = false;
  };

  void index(const Spec& s) {
    memo_.try_emplace(s.id(), n_ * n_);
    switch (s.kind()) {
      case Spec::Kind::kAchieve: break;
      case Spec::Kind::kEnsuring: index(s.body()); break;
      case Spec::Kind::kSeq:
      case Spec::Kind::kChoice:
        index(s.left());
        index(s.right());
        break;
    }
  }

  Value compute(const Spec& s, std::size_t i, std::size_t j) {
    switch (s.kind()) {
      case Spec::Kind::kAchieve: {
        Value acc = Policy::bottom();
        for (std::size_t k = i; k < j; ++k) {
          acc = Policy::join(acc, Policy::atom(s.predicate(), states_[k]));
        }
        return acc;
      }
      case Spec::Kind::kEnsuring: {
        Value acc = eval(s.body(), i, j);
        for (std::size_t k = i; k < j; ++k) {
          acc = Policy::meet(acc, Policy::atom(s.predicate(), states_[k]));
        }
        return acc;
      }
      case Spec::Kind::kSeq: {
        Value acc = Policy::bottom();
        for (std::size_t k = i; k < j; ++k) {
          acc = Policy::join(acc, Policy::meet(eval(s.left(), i, k), eval(s.right(), k, j)));
        }
        return acc;
      }
      case Spec::Kind::kChoice:
        return Policy::join(eval(s.left(), i, j), eval(s.right(), i, j));
    }
    return Policy::bottom();
  }

  const std::vector<State>& states_;
  std::size_t n_;
  std::unordered_map<const void*, std::vector<Slot>> memo_;
};

struct BoolPolicy {
  static bool bottom() { return false; }
  static bool join(bool a, bool b) { return a || b; }
  static bool meet(bool a, bool b) { return a && b; }
  static bool atom(const Predicate& p, const State& s) { return p.holds(s); }
};

struct QuantPolicy {
  static double bottom() { return kNegInf; }
  static double join(double a, double b) { return std::max(a, b); }
  static double meet(double a, double b) { return std::min(a, b); }
  static double atom(const Predicate& p, const State& s) { return p.robustness(s); }
};

}  // namespace

bool eval_bool(const Spec& spec, const Rollout& rollout) {
  if (rollout.states.empty()) return false;
  WindowEvaluator<bool, BoolPolicy> ev(spec, rollout.states);
  return ev.eval(spec, 0, rollout.states.size() - 1);
}

double eval_quant(const Spec& spec, const Rollout& rollout) {
  if (rollout.length() == 0) {
    throw UndefinedRobustness("robustness of a length-0 rollout is undefined");
  }
  WindowEvaluator<double, QuantPolicy> ev(spec, rollout.states);
  return ev.eval(spec, 0, rollout.states.size() - 1);
}

}  // namespace taskspec
