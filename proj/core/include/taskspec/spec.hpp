#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "taskspec/predicate.hpp"

namespace taskspec {

// Task specification tree: achieve b | spec ensuring b | spec ; spec | spec or spec.
// Leaves are always Achieve nodes. Immutable; copies share structure.
class Spec {
 public:
  enum class Kind { kAchieve, kEnsuring, kSeq, kChoice };

  static Spec achieve(Predicate goal);
  static Spec ensuring(Spec body, Predicate constraint);
  static Spec seq(Spec first, Spec second);
  static Spec choice(Spec left, Spec right);

  Kind kind() const;
  // Achieve: the goal. Ensuring: the constraint.
  const Predicate& predicate() const;
  // Ensuring body.
  const Spec& body() const;
  // Seq / Choice operands.
  const Spec& left() const;
  const Spec& right() const;

  // Stable identity of the underlying node, for memo tables.
  const void* id() const { return node_.get(); }

  friend bool operator==(const Spec& a, const Spec& b);

 private:
  struct Node;
  explicit Spec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::string message);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

// Grammar, loosest to tightest: ensuring < or < ; < achieve. Binary operators
// associate to the left. `achieve (b1; b2; ...)` desugars to a sequence of
// achieves. Inside a predicate, `and`/`or` are predicate connectives; an `or`
// followed by `achieve` (possibly after opening parentheses) is a spec choice.
// `#` starts a line comment.
Spec parse_spec(std::string_view text, const PredicateRegistry& registry);

// Canonical text that parses back to a structurally equal tree.
std::string print_spec(const Spec& spec);

// "file:line:col: message"
std::string format_diagnostic(std::string_view file, const ParseError& error);

}  // namespace taskspec
