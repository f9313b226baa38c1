#include "taskspec/monitor.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <utility>

#include <fmt/format.h>

namespace taskspec {

// ---------------------------------------------------------------- ValueExpr

ValueExpr ValueExpr::constant(double value) {
  ValueExpr e;
  e.kind_ = Kind::kConst;
  e.value_ = value;
  return e;
}

ValueExpr ValueExpr::reg(std::size_t index) {
  ValueExpr e;
  e.kind_ = Kind::kRegister;
  e.register_ = index;
  return e;
}

ValueExpr ValueExpr::robustness(Predicate predicate) {
  ValueExpr e;
  e.kind_ = Kind::kRobustness;
  e.predicate_ = std::move(predicate);
  return e;
}

ValueExpr ValueExpr::min(std::vector<ValueExpr> terms) {
  if (terms.empty()) throw std::invalid_argument("min of no terms");
  std::vector<ValueExpr> flat;
  for (auto& t : terms) {
    if (t.kind_ == Kind::kMin) {
      for (auto& inner : t.terms_) flat.push_back(std::move(inner));
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (flat.size() == 1) return std::move(flat.front());
  ValueExpr e;
  e.kind_ = Kind::kMin;
  e.terms_ = std::move(flat);
  return e;
}

double ValueExpr::eval(StateView s, ValuationView v) const {
  switch (kind_) {
    case Kind::kConst: return value_;
    case Kind::kRegister: return v[register_];
    case Kind::kRobustness: return predicate_->robustness(s);
    case Kind::kMin: {
      double acc = terms_.front().eval(s, v);
      for (std::size_t i = 1; i < terms_.size(); ++i) acc = std::min(acc, terms_[i].eval(s, v));
      return acc;
    }
  }
  return 0.0;
}

ValueExpr ValueExpr::remap(std::span<const std::size_t> mapping) const {
  switch (kind_) {
    case Kind::kRegister: return reg(mapping[register_]);
    case Kind::kMin: {
      std::vector<ValueExpr> out;
      out.reserve(terms_.size());
      for (const auto& t : terms_) out.push_back(t.remap(mapping));
      return min(std::move(out));
    }
    default: return *this;
  }
}

ValueExpr ValueExpr::bind(ValuationView values) const {
  switch (kind_) {
    case Kind::kRegister: return constant(values[register_]);
    case Kind::kMin: {
      std::vector<ValueExpr> out;
      out.reserve(terms_.size());
      for (const auto& t : terms_) out.push_back(t.bind(values));
      return min(std::move(out));
    }
    default: return *this;
  }
}

bool ValueExpr::reads_registers() const {
  if (kind_ == Kind::kRegister) return true;
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const ValueExpr& t) { return t.reads_registers(); });
}

void ValueExpr::collect_registers(std::vector<std::size_t>& out) const {
  if (kind_ == Kind::kRegister) out.push_back(register_);
  for (const auto& t : terms_) t.collect_registers(out);
}

void ValueExpr::collect_predicates(std::vector<Predicate>& out) const {
  if (kind_ == Kind::kRobustness) out.push_back(*predicate_);
  for (const auto& t : terms_) t.collect_predicates(out);
}

bool operator==(const ValueExpr& a, const ValueExpr& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case ValueExpr::Kind::kConst: return a.value_ == b.value_;
    case ValueExpr::Kind::kRegister: return a.register_ == b.register_;
    case ValueExpr::Kind::kRobustness: return *a.predicate_ == *b.predicate_;
    case ValueExpr::Kind::kMin: return a.terms_ == b.terms_;
  }
  return false;
}

// -------------------------------------------------------------------- Guard

Guard Guard::always() { return Guard(); }

Guard Guard::holds(Predicate predicate) {
  Guard g;
  g.kind_ = Kind::kHolds;
  g.predicate_ = std::move(predicate);
  return g;
}

Guard Guard::positive(ValueExpr expr) {
  Guard g;
  g.kind_ = Kind::kPositive;
  g.expr_ = std::move(expr);
  return g;
}

Guard Guard::all(std::vector<Guard> operands) {
  std::vector<Guard> flat;
  for (auto& op : operands) {
    if (op.kind_ == Kind::kTrue) continue;
    if (op.kind_ == Kind::kAll) {
      for (auto& inner : op.operands_) flat.push_back(std::move(inner));
    } else {
      flat.push_back(std::move(op));
    }
  }
  if (flat.empty()) return always();
  if (flat.size() == 1) return std::move(flat.front());
  Guard g;
  g.kind_ = Kind::kAll;
  g.operands_ = std::move(flat);
  return g;
}

bool Guard::eval(StateView s, ValuationView v) const {
  switch (kind_) {
    case Kind::kTrue: return true;
    case Kind::kHolds: return predicate_->holds(s);
    case Kind::kPositive: return expr_->eval(s, v) > 0.0;
    case Kind::kAll:
      return std::all_of(operands_.begin(), operands_.end(),
                         [&](const Guard& g) { return g.eval(s, v); });
  }
  return false;
}

double Guard::robustness(StateView s, ValuationView v, double infinity) const {
  switch (kind_) {
    case Kind::kTrue: return infinity;
    case Kind::kHolds: return predicate_->robustness(s);
    case Kind::kPositive: return expr_->eval(s, v);
    case Kind::kAll: {
      double acc = infinity;
      for (const auto& g : operands_) acc = std::min(acc, g.robustness(s, v, infinity));
      return acc;
    }
  }
  return 0.0;
}

Guard Guard::remap(std::span<const std::size_t> mapping) const {
  switch (kind_) {
    case Kind::kPositive: return positive(expr_->remap(mapping));
    case Kind::kAll: {
      std::vector<Guard> out;
      for (const auto& g : operands_) out.push_back(g.remap(mapping));
      return all(std::move(out));
    }
    default: return *this;
  }
}

Guard Guard::bind(ValuationView values) const {
  switch (kind_) {
    case Kind::kPositive: return positive(expr_->bind(values));
    case Kind::kAll: {
      std::vector<Guard> out;
      for (const auto& g : operands_) out.push_back(g.bind(values));
      return all(std::move(out));
    }
    default: return *this;
  }
}

void Guard::collect_registers(std::vector<std::size_t>& out) const {
  if (expr_) expr_->collect_registers(out);
  for (const auto& g : operands_) g.collect_registers(out);
}

bool operator==(const Guard& a, const Guard& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Guard::Kind::kTrue: return true;
    case Guard::Kind::kHolds: return *a.predicate_ == *b.predicate_;
    case Guard::Kind::kPositive: return *a.expr_ == *b.expr_;
    case Guard::Kind::kAll: return a.operands_ == b.operands_;
  }
  return false;
}

// ------------------------------------------------------------------- Update

Update Update::identity(std::size_t registers) {
  Update u;
  u.assign.resize(registers);
  return u;
}

bool Update::is_identity() const {
  return std::none_of(assign.begin(), assign.end(),
                      [](const auto& a) { return a.has_value(); });
}

Valuation Update::apply(StateView s, ValuationView v) const {
  Valuation out(v.size());
  apply_into(s, v, out);
  return out;
}

void Update::apply_into(StateView s, ValuationView v, std::span<double> out) const {
  for (std::size_t i = 0; i < assign.size(); ++i) {
    out[i] = assign[i] ? assign[i]->eval(s, v) : v[i];
  }
}

// -------------------------------------------------------------- TaskMonitor

std::vector<std::size_t> TaskMonitor::outgoing(std::size_t q) const {
  std::vector<std::size_t> out;
  for (const auto& t : transitions) {
    if (t.source == q) out.push_back(t.id);
  }
  return out;
}

std::vector<std::size_t> TaskMonitor::exits(std::size_t q) const {
  std::vector<std::size_t> out;
  for (const auto& t : transitions) {
    if (t.source == q && !t.is_self_loop()) out.push_back(t.id);
  }
  return out;
}

std::optional<std::size_t> TaskMonitor::self_loop(std::size_t q) const {
  for (const auto& t : transitions) {
    if (t.source == q && t.is_self_loop()) return t.id;
  }
  return std::nullopt;
}

std::vector<std::size_t> TaskMonitor::final_states() const {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < num_states; ++q) {
    if (is_final[q]) out.push_back(q);
  }
  return out;
}

// --------------------------------------------------------------- validation

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kMalformed: return "malformed";
    case ViolationKind::kCycle: return "cycle beyond self loop";
    case ViolationKind::kFinalMismatch: return "final states differ from sinks";
    case ViolationKind::kUnreachable: return "unreachable state";
    case ViolationKind::kDeadEnd: return "no final state reachable";
    case ViolationKind::kDuplicateEdge: return "duplicate transition";
    case ViolationKind::kMissingSelfLoop: return "missing self loop";
  }
  return "unknown";
}

namespace {

std::vector<Violation> check_shape(const TaskMonitor& m) {
  std::vector<Violation> out;
  const auto bad = [&](std::string msg) {
    out.push_back({ViolationKind::kMalformed, std::move(msg)});
  };
  const std::size_t n = m.num_states;
  const std::size_t regs = m.num_registers();
  if (n == 0) bad("monitor has no states");
  if (m.initial_state >= n) bad(fmt::format("initial state {} out of range", m.initial_state));
  if (m.is_final.size() != n) bad("final-state flags do not cover every state");
  if (m.reward.size() != n) bad("reward table does not cover every state");
  if (m.initial_valuation.size() != regs) {
    bad(fmt::format("initial valuation has {} entries for {} registers",
                    m.initial_valuation.size(), regs));
  }
  if (!out.empty()) return out;

  const auto check_regs = [&](const std::vector<std::size_t>& used, const std::string& where) {
    for (auto r : used) {
      if (r >= regs) bad(fmt::format("{} reads register {} of {}", where, r, regs));
    }
  };
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    const auto& t = m.transitions[i];
    const auto where = fmt::format("transition {}", i);
    if (t.id != i) bad(fmt::format("{} carries id {}", where, t.id));
    if (t.source >= n || t.target >= n) {
      bad(fmt::format("{} connects {} -> {} outside {} states", where, t.source, t.target, n));
    }
    if (t.update.assign.size() != regs) {
      bad(fmt::format("{} updates {} of {} registers", where, t.update.assign.size(), regs));
    }
    std::vector<std::size_t> used;
    t.guard.collect_registers(used);
    for (const auto& a : t.update.assign) {
      if (a) a->collect_registers(used);
    }
    check_regs(used, where);
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (m.is_final[q] != m.reward[q].has_value()) {
      bad(fmt::format("state {} reward presence does not match its final flag", q));
    }
    if (m.reward[q]) {
      std::vector<std::size_t> used;
      m.reward[q]->collect_registers(used);
      check_regs(used, fmt::format("reward of state {}", q));
    }
  }
  return out;
}

// Kahn order over non-self edges; shorter than num_states iff cyclic.
std::vector<std::size_t> topological_order(const TaskMonitor& m) {
  std::vector<int> indegree(m.num_states, 0);
  std::vector<std::vector<std::size_t>> succ(m.num_states);
  for (const auto& t : m.transitions) {
    if (t.is_self_loop()) continue;
    succ[t.source].push_back(t.target);
    ++indegree[t.target];
  }
  std::deque<std::size_t> ready;
  for (std::size_t q = 0; q < m.num_states; ++q) {
    if (indegree[q] == 0) ready.push_back(q);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto q = ready.front();
    ready.pop_front();
    order.push_back(q);
    for (auto r : succ[q]) {
      if (--indegree[r] == 0) ready.push_back(r);
    }
  }
  return order;
}

}  // namespace

std::vector<Violation> validate_monitor(const TaskMonitor& m) {
  auto out = check_shape(m);
  if (!out.empty()) return out;
  const std::size_t n = m.num_states;

  std::map<std::pair<std::size_t, std::size_t>, int> edges;
  for (const auto& t : m.transitions) ++edges[{t.source, t.target}];
  for (const auto& [pair, count] : edges) {
    if (count > 1) {
      out.push_back({ViolationKind::kDuplicateEdge,
                     fmt::format("{} transitions from state {} to state {}", count, pair.first,
                                 pair.second)});
    }
  }

  for (std::size_t q = 0; q < n; ++q) {
    const bool ok = std::any_of(m.transitions.begin(), m.transitions.end(), [&](const auto& t) {
      return t.source == q && t.target == q && t.guard.kind() == Guard::Kind::kTrue;
    });
    if (!ok) {
      out.push_back({ViolationKind::kMissingSelfLoop,
                     fmt::format("state {} has no self loop with a true guard", q)});
    }
  }

  const auto order = topological_order(m);
  if (order.size() != n) {
    std::vector<bool> placed(n, false);
    for (auto q : order) placed[q] = true;
    std::string members;
    for (std::size_t q = 0; q < n; ++q) {
      if (!placed[q]) members += fmt::format("{}{}", members.empty() ? "" : ", ", q);
    }
    out.push_back({ViolationKind::kCycle,
                   fmt::format("cycle beyond self loop through states {{{}}}", members)});
  }

  std::vector<bool> has_exit(n, false);
  for (const auto& t : m.transitions) {
    if (!t.is_self_loop()) has_exit[t.source] = true;
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (m.is_final[q] == has_exit[q]) {
      out.push_back({ViolationKind::kFinalMismatch,
                     m.is_final[q]
                         ? fmt::format("final state {} has outgoing edges", q)
                         : fmt::format("non-final state {} has no outgoing edges", q)});
    }
  }

  const auto sweep = [&](std::vector<std::size_t> seeds, bool forward) {
    std::vector<bool> seen(n, false);
    for (auto q : seeds) seen[q] = true;
    while (!seeds.empty()) {
      const auto q = seeds.back();
      seeds.pop_back();
      for (const auto& t : m.transitions) {
        const auto from = forward ? t.source : t.target;
        const auto to = forward ? t.target : t.source;
        if (from == q && !seen[to]) {
          seen[to] = true;
          seeds.push_back(to);
        }
      }
    }
    return seen;
  };
  const auto reachable = sweep({m.initial_state}, true);
  const auto productive = sweep(m.final_states(), false);
  for (std::size_t q = 0; q < n; ++q) {
    if (!reachable[q]) {
      out.push_back({ViolationKind::kUnreachable,
                     fmt::format("state {} is not reachable from the initial state", q)});
    }
    if (!productive[q]) {
      out.push_back({ViolationKind::kDeadEnd,
                     fmt::format("no final state is reachable from state {}", q)});
    }
  }
  return out;
}

MonitorDepths longest_path_depths(const TaskMonitor& m) {
  if (m.initial_state >= m.num_states) throw InvalidMonitor("initial state out of range");
  const auto order = topological_order(m);
  if (order.size() != m.num_states) {
    throw InvalidMonitor("monitor graph has a cycle beyond self loops");
  }
  MonitorDepths d;
  d.depth.assign(m.num_states, 0);
  std::vector<bool> reached(m.num_states, false);
  reached[m.initial_state] = true;
  for (auto q : order) {
    if (!reached[q]) continue;
    for (const auto& t : m.transitions) {
      if (t.source != q || t.is_self_loop()) continue;
      reached[t.target] = true;
      d.depth[t.target] = std::max(d.depth[t.target], d.depth[q] + 1);
    }
  }
  d.max_depth = *std::max_element(d.depth.begin(), d.depth.end());
  return d;
}

// ---------------------------------------------------------------- printing

std::string to_string(const ValueExpr& e, const TaskMonitor& m) {
  switch (e.kind()) {
    case ValueExpr::Kind::kConst:
      return e.value() >= m.infinity ? std::string("inf") : fmt::format("{}", e.value());
    case ValueExpr::Kind::kRegister:
      return e.register_index() < m.register_names.size()
                 ? m.register_names[e.register_index()]
                 : fmt::format("r{}", e.register_index());
    case ValueExpr::Kind::kRobustness: return fmt::format("q[{}]", to_string(e.predicate()));
    case ValueExpr::Kind::kMin: {
      std::string out = "min{";
      for (std::size_t i = 0; i < e.terms().size(); ++i) {
        if (i) out += ", ";
        out += to_string(e.terms()[i], m);
      }
      return out + "}";
    }
  }
  return {};
}

std::string to_string(const Guard& g, const TaskMonitor& m) {
  switch (g.kind()) {
    case Guard::Kind::kTrue: return "true";
    case Guard::Kind::kHolds: return to_string(g.predicate());
    case Guard::Kind::kPositive: return fmt::format("{} > 0", to_string(g.expr(), m));
    case Guard::Kind::kAll: {
      std::string out;
      for (std::size_t i = 0; i < g.operands().size(); ++i) {
        if (i) out += " && ";
        const bool wrap = g.operands()[i].kind() == Guard::Kind::kHolds &&
                          g.operands()[i].predicate().kind() != Predicate::Kind::kAtom;
        out += wrap ? "(" + to_string(g.operands()[i], m) + ")"
                    : to_string(g.operands()[i], m);
      }
      return out;
    }
  }
  return {};
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string update_text(const Update& u, const TaskMonitor& m, std::string_view sep) {
  std::string out;
  for (std::size_t r = 0; r < u.assign.size(); ++r) {
    if (!u.assign[r]) continue;
    if (!out.empty()) out += sep;
    out += fmt::format("{} <- {}", m.register_names[r], to_string(*u.assign[r], m));
  }
  return out;
}

}  // namespace

std::string to_dot(const TaskMonitor& m) {
  std::string out = "digraph monitor {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (std::size_t q = 0; q < m.num_states; ++q) {
    std::string label = fmt::format("q{}", q);
    if (m.reward[q]) label += fmt::format("\\nrho: {}", escape(to_string(*m.reward[q], m)));
    out += fmt::format("  q{} [shape={}, label=\"{}\"];\n", q,
                       m.is_final[q] ? "doublecircle" : "circle", label);
  }
  std::string init;
  for (std::size_t r = 0; r < m.num_registers(); ++r) {
    if (!init.empty()) init += "\\n";
    const double v = m.initial_valuation[r];
    init += fmt::format("{} <- {}", m.register_names[r],
                        v >= m.infinity ? std::string("inf") : fmt::format("{}", v));
  }
  out += fmt::format("  __start -> q{} [label=\"{}\"];\n", m.initial_state, escape(init));
  for (const auto& t : m.transitions) {
    std::string label = fmt::format("#{}", t.id);
    if (t.guard.kind() != Guard::Kind::kTrue) {
      label += fmt::format("\\nSigma: {}", escape(to_string(t.guard, m)));
    }
    const auto upd = update_text(t.update, m, "\\n");
    if (!upd.empty()) label += "\\n" + escape(upd);
    out += fmt::format("  q{} -> q{} [label=\"{}\"];\n", t.source, t.target, label);
  }
  out += "}\n";
  return out;
}

std::uint64_t fingerprint(const TaskMonitor& m) {
  std::string canon = fmt::format("states={};initial={};inf={};", m.num_states,
                                  m.initial_state, m.infinity);
  for (std::size_t r = 0; r < m.num_registers(); ++r) {
    canon += fmt::format("reg {}={};", m.register_names[r], m.initial_valuation[r]);
  }
  for (const auto& t : m.transitions) {
    canon += fmt::format("t{}:{}->{}[{}]{{{}}};", t.id, t.source, t.target,
                         to_string(t.guard, m), update_text(t.update, m, ","));
  }
  for (std::size_t q = 0; q < m.num_states; ++q) {
    if (m.reward[q]) canon += fmt::format("F{}:{};", q, to_string(*m.reward[q], m));
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace taskspec
