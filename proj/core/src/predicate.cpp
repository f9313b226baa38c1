#include "taskspec/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <variant>

#include <fmt/format.h>

namespace taskspec {

void PredicateRegistry::add(AtomicPredicateDecl decl) {
  if (decl.name.empty()) {
    throw RegistrationError("predicate name must not be empty");
  }
  if (!decl.holds || !decl.robustness) {
    throw RegistrationError(fmt::format(
        "predicate '{}' needs both a Boolean and a quantitative evaluation", decl.name));
  }
  if (decls_.contains(decl.name)) {
    throw RegistrationError(fmt::format("predicate '{}' is already registered", decl.name));
  }
  auto name = decl.name;
  decls_.emplace(std::move(name), std::make_shared<const AtomicPredicateDecl>(std::move(decl)));
}

std::shared_ptr<const AtomicPredicateDecl> PredicateRegistry::find(std::string_view name) const {
  auto it = decls_.find(name);
  return it == decls_.end() ? nullptr : it->second;
}

std::vector<std::string> PredicateRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(decls_.size());
  for (const auto& [name, _] : decls_) out.push_back(name);
  return out;
}

PredicateRegistry register_predicate(PredicateRegistry registry, AtomicPredicateDecl decl) {
  registry.add(std::move(decl));
  return registry;
}

struct Predicate::Node {
  struct Atom {
    std::shared_ptr<const AtomicPredicateDecl> decl;
    std::vector<double> params;
  };
  struct Binary {
    Predicate left;
    Predicate right;
  };
  Kind kind;
  std::variant<Atom, Binary> data;
};

Predicate Predicate::atom(std::shared_ptr<const AtomicPredicateDecl> decl,
                          std::vector<double> params) {
  if (!decl) throw std::invalid_argument("atom without declaration");
  if (params.size() != decl->arity) {
    throw std::invalid_argument(fmt::format("predicate '{}' expects {} parameter(s), got {}",
                                            decl->name, decl->arity, params.size()));
  }
  return Predicate(std::make_shared<const Node>(
      Node{Kind::kAtom, Node::Atom{std::move(decl), std::move(params)}}));
}

Predicate Predicate::conj(Predicate left, Predicate right) {
  return Predicate(std::make_shared<const Node>(
      Node{Kind::kAnd, Node::Binary{std::move(left), std::move(right)}}));
}

Predicate Predicate::disj(Predicate left, Predicate right) {
  return Predicate(std::make_shared<const Node>(
      Node{Kind::kOr, Node::Binary{std::move(left), std::move(right)}}));
}

Predicate::Kind Predicate::kind() const { return node_->kind; }

const std::string& Predicate::name() const {
  return std::get<Node::Atom>(node_->data).decl->name;
}
const std::vector<double>& Predicate::params() const {
  return std::get<Node::Atom>(node_->data).params;
}
const AtomicPredicateDecl& Predicate::decl() const {
  return *std::get<Node::Atom>(node_->data).decl;
}
const Predicate& Predicate::left() const { return std::get<Node::Binary>(node_->data).left; }
const Predicate& Predicate::right() const { return std::get<Node::Binary>(node_->data).right; }

bool Predicate::holds(StateView s) const {
  switch (node_->kind) {
    case Kind::kAtom: {
      const auto& a = std::get<Node::Atom>(node_->data);
      return a.decl->holds(s, a.params);
    }
    case Kind::kAnd: return left().holds(s) && right().holds(s);
    case Kind::kOr: return left().holds(s) || right().holds(s);
  }
  return false;
}

double Predicate::robustness(StateView s) const {
  switch (node_->kind) {
    case Kind::kAtom: {
      const auto& a = std::get<Node::Atom>(node_->data);
      return a.decl->robustness(s, a.params);
    }
    case Kind::kAnd: return std::min(left().robustness(s), right().robustness(s));
    case Kind::kOr: return std::max(left().robustness(s), right().robustness(s));
  }
  return 0.0;
}

double Predicate::magnitude_bound(const StateBox& box) const {
  if (node_->kind == Kind::kAtom) {
    const auto& a = std::get<Node::Atom>(node_->data);
    if (!a.decl->magnitude_bound) return std::numeric_limits<double>::infinity();
    return a.decl->magnitude_bound(box, a.params);
  }
  // min/max of values inside [-B_i, B_i] stay inside [-max B_i, max B_i].
  return std::max(left().magnitude_bound(box), right().magnitude_bound(box));
}

std::vector<Predicate> Predicate::conjuncts() const {
  if (node_->kind != Kind::kAnd) return {*this};
  auto out = left().conjuncts();
  auto rest = right().conjuncts();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

bool operator==(const Predicate& a, const Predicate& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.kind() == Predicate::Kind::kAtom) {
    return a.name() == b.name() && a.params() == b.params();
  }
  return a.left() == b.left() && a.right() == b.right();
}

namespace {

int precedence(const Predicate& p) {
  switch (p.kind()) {
    case Predicate::Kind::kOr: return 0;
    case Predicate::Kind::kAnd: return 1;
    case Predicate::Kind::kAtom: return 2;
  }
  return 2;
}

void print(const Predicate& p, std::string& out) {
  if (p.kind() == Predicate::Kind::kAtom) {
    out += p.name();
    if (!p.params().empty()) {
      out += '(';
      for (std::size_t i = 0; i < p.params().size(); ++i) {
        if (i) out += ',';
        out += fmt::format("{}", p.params()[i]);
      }
      out += ')';
    }
    return;
  }
  const int prec = precedence(p);
  const auto emit = [&](const Predicate& child, bool strict) {
    const int cp = precedence(child);
    const bool parens = strict ? cp <= prec : cp < prec;
    if (parens) out += '(';
    print(child, out);
    if (parens) out += ')';
  };
  emit(p.left(), false);
  out += p.kind() == Predicate::Kind::kAnd ? " and " : " or ";
  emit(p.right(), true);
}

}  // namespace

std::string to_string(const Predicate& p) {
  std::string out;
  print(p, out);
  return out;
}

}  // namespace taskspec
