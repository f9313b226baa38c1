#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace taskspec {

using StateView = std::span<const double>;
using ParamView = std::span<const double>;

// Axis-aligned box over environment states. Used to bound robustness values.
struct StateBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

// A user-registered state property. `holds` and `robustness` must agree:
// holds(s) == (robustness(s) > 0) for every reachable state.
struct AtomicPredicateDecl {
  std::string name;
  std::size_t arity = 0;
  std::function<bool(StateView, ParamView)> holds;
  std::function<double(StateView, ParamView)> robustness;
  // Upper bound on |robustness| over a state box. Optional; when absent the
  // predicate contributes +inf to shaping bounds.
  std::function<double(const StateBox&, ParamView)> magnitude_bound;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PredicateRegistry {
 public:
  // Throws RegistrationError when the name is taken or the decl is incomplete.
  void add(AtomicPredicateDecl decl);

  std::shared_ptr<const AtomicPredicateDecl> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const { return decls_.size(); }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<const AtomicPredicateDecl>, std::less<>> decls_;
};

PredicateRegistry register_predicate(PredicateRegistry registry, AtomicPredicateDecl decl);

// Negation-free Boolean combination of atomic predicates. Immutable; copies
// share structure.
class Predicate {
 public:
  enum class Kind { kAtom, kAnd, kOr };

  static Predicate atom(std::shared_ptr<const AtomicPredicateDecl> decl,
                        std::vector<double> params);
  static Predicate conj(Predicate left, Predicate right);
  static Predicate disj(Predicate left, Predicate right);

  Kind kind() const;
  // Atom accessors.
  const std::string& name() const;
  const std::vector<double>& params() const;
  const AtomicPredicateDecl& decl() const;
  // And/Or accessors.
  const Predicate& left() const;
  const Predicate& right() const;

  bool holds(StateView s) const;
  // min for conjunction, max for disjunction.
  double robustness(StateView s) const;
  double magnitude_bound(const StateBox& box) const;

  // Top-level conjuncts, flattening nested Ands.
  std::vector<Predicate> conjuncts() const;

  friend bool operator==(const Predicate& a, const Predicate& b);

 private:
  struct Node;
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

std::string to_string(const Predicate& p);

}  // namespace taskspec
