#include "taskspec/spec.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>

namespace taskspec {

struct Spec::Node {
  struct Leaf {
    Predicate predicate;
  };
  struct Constrained {
    Spec body;
    Predicate constraint;
  };
  struct Binary {
    Spec left;
    Spec right;
  };
  Kind kind;
  std::variant<Leaf, Constrained, Binary> data;
};

Spec Spec::achieve(Predicate goal) {
  return Spec(std::make_shared<const Node>(Node{Kind::kAchieve, Node::Leaf{std::move(goal)}}));
}

Spec Spec::ensuring(Spec body, Predicate constraint) {
  return Spec(std::make_shared<const Node>(
      Node{Kind::kEnsuring, Node::Constrained{std::move(body), std::move(constraint)}}));
}

Spec Spec::seq(Spec first, Spec second) {
  return Spec(std::make_shared<const Node>(
      Node{Kind::kSeq, Node::Binary{std::move(first), std::move(second)}}));
}

Spec Spec::choice(Spec left, Spec right) {
  return Spec(std::make_shared<const Node>(
      Node{Kind::kChoice, Node::Binary{std::move(left), std::move(right)}}));
}

Spec::Kind Spec::kind() const { return node_->kind; }

const Predicate& Spec::predicate() const {
  if (node_->kind == Kind::kAchieve) return std::get<Node::Leaf>(node_->data).predicate;
  return std::get<Node::Constrained>(node_->data).constraint;
}
const Spec& Spec::body() const { return std::get<Node::Constrained>(node_->data).body; }
const Spec& Spec::left() const { return std::get<Node::Binary>(node_->data).left; }
const Spec& Spec::right() const { return std::get<Node::Binary>(node_->data).right; }

bool operator==(const Spec& a, const Spec& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Spec::Kind::kAchieve: return a.predicate() == b.predicate();
    case Spec::Kind::kEnsuring:
      return a.predicate() == b.predicate() && a.body() == b.body();
    case Spec::Kind::kSeq:
    case Spec::Kind::kChoice: return a.left() == b.left() && a.right() == b.right();
  }
  return false;
}

ParseError::ParseError(int line, int column, std::string message)
    : std::runtime_error(fmt::format("{}:{}: {}", line, column, message)),
      line_(line),
      column_(column),
      message_(std::move(message)) {}

std::string format_diagnostic(std::string_view file, const ParseError& error) {
  return fmt::format("{}:{}:{}: {}", file, error.line(), error.column(), error.message());
}

namespace {

enum class Tok {
  kIdent,
  kNumber,
  kLParen,
  kRParen,
  kComma,
  kSemi,
  kAchieve,
  kEnsuring,
  kOr,
  kAnd,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kEnd: return "end of input";
    case Tok::kNumber:
    case Tok::kIdent: return fmt::format("'{}'", t.text);
    default: return fmt::format("'{}'", t.text);
  }
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  const auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (c == '\n') {
        ++line;
        column = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++column;
      }
    }
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok{Tok::kEnd, {}, 0.0, line, column};
    const auto single = [&](Tok kind) {
      tok.kind = kind;
      tok.text = std::string(1, c);
      advance(1);
    };
    switch (c) {
      case '(': single(Tok::kLParen); break;
      case ')': single(Tok::kRParen); break;
      case ',': single(Tok::kComma); break;
      case ';': single(Tok::kSemi); break;
      default: break;
    }
    if (tok.kind != Tok::kEnd) {
      out.push_back(std::move(tok));
      continue;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
        ++j;
      }
      tok.text = std::string(text.substr(i, j - i));
      if (tok.text == "achieve") {
        tok.kind = Tok::kAchieve;
      } else if (tok.text == "ensuring") {
        tok.kind = Tok::kEnsuring;
      } else if (tok.text == "or") {
        tok.kind = Tok::kOr;
      } else if (tok.text == "and") {
        tok.kind = Tok::kAnd;
      } else {
        tok.kind = Tok::kIdent;
      }
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isdigit(uc) || c == '-' || c == '+' || c == '.') {
      std::size_t j = i;
      if (text[j] == '-' || text[j] == '+') ++j;
      const std::size_t digits_start = j;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                 text[j] == '.')) {
        ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '-' || text[k] == '+')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      auto literal = text.substr(i, j - i);
      if (!literal.empty() && literal.front() == '+') literal.remove_prefix(1);
      double value = 0.0;
      const auto* first = literal.data();
      const auto* last = literal.data() + literal.size();
      const auto res = std::from_chars(first, last, value);
      if (j == digits_start || res.ec != std::errc{} || res.ptr != last) {
        throw ParseError(line, column,
                         fmt::format("malformed number '{}'", text.substr(i, j - i)));
      }
      tok.kind = Tok::kNumber;
      tok.text = std::string(text.substr(i, j - i));
      tok.number = value;
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    std::size_t len = 1;
    if (uc >= 0x80) {
      while (i + len < text.size() &&
             (static_cast<unsigned char>(text[i + len]) & 0xC0) == 0x80) {
        ++len;
      }
    }
    throw ParseError(line, column,
                     fmt::format("unexpected character '{}'", text.substr(i, len)));
  }
  out.push_back(Token{Tok::kEnd, {}, 0.0, line, column});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const PredicateRegistry& registry)
      : tokens_(std::move(tokens)), registry_(registry) {}

  Spec parse() {
    Spec s = parse_ensuring();
    if (peek().kind == Tok::kRParen) {
      fail(peek(), "unbalanced parentheses: unexpected ')'");
    }
    if (peek().kind == Tok::kOr) {
      fail(peek(), "a choice after 'ensuring' must be parenthesized");
    }
    if (peek().kind != Tok::kEnd) {
      fail(peek(), fmt::format("unexpected {}", describe(peek())));
    }
    return s;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  [[noreturn]] static void fail(const Token& at, std::string message) {
    throw ParseError(at.line, at.column, std::move(message));
  }
  void expect_close(const Token& open) {
    if (peek().kind != Tok::kRParen) {
      fail(peek(), fmt::format("unbalanced parentheses: expected ')' to close '(' at {}:{}, "
                               "found {}",
                               open.line, open.column, describe(peek())));
    }
    next();
  }

  Spec parse_ensuring() {
    Spec s = parse_choice();
    while (peek().kind == Tok::kEnsuring) {
      next();
      s = Spec::ensuring(std::move(s), parse_predicate());
    }
    return s;
  }

  Spec parse_choice() {
    Spec s = parse_seq();
    while (peek().kind == Tok::kOr) {
      next();
      s = Spec::choice(std::move(s), parse_seq());
    }
    return s;
  }

  Spec parse_seq() {
    Spec s = parse_unit();
    while (peek().kind == Tok::kSemi) {
      next();
      s = Spec::seq(std::move(s), parse_unit());
    }
    return s;
  }

  Spec parse_unit() {
    if (peek().kind == Tok::kAchieve) {
      next();
      return parse_achieve_body();
    }
    if (peek().kind == Tok::kLParen) {
      const Token open = next();
      Spec s = parse_ensuring();
      expect_close(open);
      return s;
    }
    fail(peek(), fmt::format("expected 'achieve' or '(', found {}", describe(peek())));
  }

  // True when the parenthesized group starting at the current token contains a
  // ';' at its own nesting level.
  bool group_has_semicolon() const {
    int depth = 0;
    for (std::size_t k = pos_; k < tokens_.size(); ++k) {
      switch (tokens_[k].kind) {
        case Tok::kLParen: ++depth; break;
        case Tok::kRParen:
          if (--depth == 0) return false;
          break;
        case Tok::kSemi:
          if (depth == 1) return true;
          break;
        case Tok::kEnd: return false;
        default: break;
      }
    }
    return false;
  }

  Spec parse_achieve_body() {
    if (peek().kind == Tok::kLParen && group_has_semicolon()) {
      const Token open = next();
      Spec s = Spec::achieve(parse_predicate());
      while (peek().kind == Tok::kSemi) {
        next();
        s = Spec::seq(std::move(s), Spec::achieve(parse_predicate()));
      }
      expect_close(open);
      if (peek().kind == Tok::kAnd || (peek().kind == Tok::kOr && !spec_level_or())) {
        fail(peek(), "a sequence of goals cannot be combined with predicate connectives");
      }
      return s;
    }
    return Spec::achieve(parse_predicate());
  }

  // At an `or`: does it join specifications rather than predicates?
  bool spec_level_or() const {
    std::size_t k = pos_ + 1;
    while (k < tokens_.size() && tokens_[k].kind == Tok::kLParen) ++k;
    return k < tokens_.size() && tokens_[k].kind == Tok::kAchieve;
  }

  Predicate parse_predicate() {
    Predicate p = parse_conjunction();
    while (peek().kind == Tok::kOr && !spec_level_or()) {
      next();
      p = Predicate::disj(std::move(p), parse_conjunction());
    }
    return p;
  }

  Predicate parse_conjunction() {
    Predicate p = parse_atom();
    while (peek().kind == Tok::kAnd) {
      next();
      p = Predicate::conj(std::move(p), parse_atom());
    }
    return p;
  }

  Predicate parse_atom() {
    if (peek().kind == Tok::kLParen) {
      const Token open = next();
      Predicate p = parse_predicate();
      expect_close(open);
      return p;
    }
    if (peek().kind != Tok::kIdent) {
      fail(peek(), fmt::format("expected a predicate, found {}", describe(peek())));
    }
    const Token ident = next();
    auto decl = registry_.find(ident.text);
    if (!decl) fail(ident, fmt::format("unknown predicate '{}'", ident.text));

    std::vector<double> params;
    if (peek().kind == Tok::kLParen) {
      const Token open = next();
      if (peek().kind != Tok::kRParen) {
        for (;;) {
          if (peek().kind != Tok::kNumber) {
            fail(peek(), fmt::format("expected a number, found {}", describe(peek())));
          }
          params.push_back(next().number);
          if (peek().kind != Tok::kComma) break;
          next();
        }
      }
      expect_close(open);
    }
    if (params.size() != decl->arity) {
      fail(ident, fmt::format("predicate '{}' expects {} parameter(s), got {}", ident.text,
                              decl->arity, params.size()));
    }
    return Predicate::atom(std::move(decl), std::move(params));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const PredicateRegistry& registry_;
};

int precedence(const Spec& s) {
  switch (s.kind()) {
    case Spec::Kind::kEnsuring: return 0;
    case Spec::Kind::kChoice: return 1;
    case Spec::Kind::kSeq: return 2;
    case Spec::Kind::kAchieve: return 3;
  }
  return 3;
}

void print(const Spec& s, std::string& out) {
  const auto emit = [&](const Spec& child, bool parens) {
    if (parens) out += '(';
    print(child, out);
    if (parens) out += ')';
  };
  switch (s.kind()) {
    case Spec::Kind::kAchieve:
      out += "achieve ";
      out += to_string(s.predicate());
      return;
    case Spec::Kind::kEnsuring:
      emit(s.body(), false);
      out += " ensuring ";
      out += to_string(s.predicate());
      return;
    case Spec::Kind::kSeq:
    case Spec::Kind::kChoice: {
      const int prec = precedence(s);
      emit(s.left(), precedence(s.left()) < prec);
      out += s.kind() == Spec::Kind::kSeq ? "; " : " or ";
      emit(s.right(), precedence(s.right()) <= prec);
      return;
    }
  }
}

}  // namespace

Spec parse_spec(std::string_view text, const PredicateRegistry& registry) {
  return Parser(lex(text), registry).parse();
}

std::string print_spec(const Spec& spec) {
  std::string out;
  print(spec, out);
  return out;
}

}  // namespace taskspec
