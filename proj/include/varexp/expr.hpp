#ifndef VAREXP_EXPR_HPP
#define VAREXP_EXPR_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace varexp::expr {

//! Syntax error with the byte offset where parsing failed.
struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

//! Domain error during evaluation (ln of a nonpositive value, 0 to a
//! negative power, negative base with a non-integer exponent).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Env {
  double x1 = 0.0;
  double x2 = 0.0;
  double t = 0.0;
};

enum class Kind { Number, Variable, Unary, Binary, Call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // variable or function name
  char op = 0;       // '+', '-', '*', '/', '^' (unary minus stores '-')
  std::vector<NodePtr> args;
};

inline double eval(const Node& n, const Env& env) {
  switch (n.kind) {
    case Kind::Number:
      return n.number;
    case Kind::Variable:
      if (n.name == "x1") return env.x1;
      if (n.name == "x2") return env.x2;
      return env.t;
    case Kind::Unary:
      return -eval(*n.args[0], env);
    case Kind::Binary: {
      const double a = eval(*n.args[0], env);
      const double b = eval(*n.args[1], env);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: {  // '^'
          if (a == 0.0 && b < 0.0) throw EvalError("0 raised to a negative power");
          if (a < 0.0 && b != std::nearbyint(b))
            throw EvalError("negative base raised to a non-integer power");
          return std::pow(a, b);
        }
      }
    }
    case Kind::Call: {
      const double a = eval(*n.args[0], env);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "abs") return std::abs(a);
      if (n.name == "ln") {
        if (!(a > 0.0)) throw EvalError("ln of a nonpositive value");
        return std::log(a);
      }
      const double b = eval(*n.args[1], env);
      return n.name == "min" ? std::min(a, b) : std::max(a, b);
    }
  }
  throw EvalError("corrupt expression node");
}

//! Canonical fully parenthesized form; parsing it back yields an identical
//! tree. Numbers print with 17 significant digits so doubles round-trip.
inline std::string print(const Node& n) {
  switch (n.kind) {
    case Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      return buf;
    }
    case Kind::Variable:
      return n.name;
    case Kind::Unary:
      return "(-" + print(*n.args[0]) + ")";
    case Kind::Binary:
      return "(" + print(*n.args[0]) + n.op + print(*n.args[1]) + ")";
    case Kind::Call: {
      std::string s = n.name + "(" + print(*n.args[0]);
      for (std::size_t i = 1; i < n.args.size(); ++i) s += "," + print(*n.args[i]);
      return s + ")";
    }
  }
  return {};
}

inline bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.op != b.op || a.name != b.name || a.args.size() != b.args.size())
    return false;
  if (a.kind == Kind::Number && !(a.number == b.number)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars)
      : src_(src), vars_(vars) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  // sum := term (('+'|'-') term)*
  NodePtr parse_sum() {
    NodePtr left = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+'))
        left = make_binary('+', left, parse_term());
      else if (accept('-'))
        left = make_binary('-', left, parse_term());
      else
        return left;
    }
  }

  // term := unary (('*'|'/') unary)*
  NodePtr parse_term() {
    NodePtr left = parse_unary();
    for (;;) {
      skip_ws();
      if (accept('*'))
        left = make_binary('*', left, parse_unary());
      else if (accept('/'))
        left = make_binary('/', left, parse_unary());
      else
        return left;
    }
  }

  // unary := '-' unary | power      (so -x^2 parses as -(x^2))
  NodePtr parse_unary() {
    skip_ws();
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Unary;
      n->op = '-';
      n->args.push_back(parse_unary());
      return n;
    }
    return parse_power();
  }

  // power := primary ('^' unary)?   (right associative, binds above unary -)
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    if (accept('^')) return make_binary('^', base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("expected a value", pos_);
    const char c = src_[pos_];
    if (accept('(')) {
      NodePtr e = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_name();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    double v = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) throw ParseError("malformed number", pos_);
    pos_ = static_cast<std::size_t>(res.ptr - src_.data());
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->number = v;
    return n;
  }

  NodePtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    static const char* fns1[] = {"sin", "cos", "exp", "ln", "abs"};
    static const char* fns2[] = {"min", "max"};
    const bool is_fn1 = std::find_if(std::begin(fns1), std::end(fns1), [&](const char* f) {
                          return name == f;
                        }) != std::end(fns1);
    const bool is_fn2 = std::find_if(std::begin(fns2), std::end(fns2), [&](const char* f) {
                          return name == f;
                        }) != std::end(fns2);

    if (is_fn1 || is_fn2) {
      if (!accept('(')) throw ParseError("expected '(' after function " + name, pos_);
      auto n = std::make_shared<Node>();
      n->kind = Kind::Call;
      n->name = name;
      n->args.push_back(parse_sum());
      if (is_fn2) {
        if (!accept(',')) throw ParseError(name + " takes two arguments", pos_);
        n->args.push_back(parse_sum());
      }
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return n;
    }

    for (const auto& v : vars_)
      if (name == v) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->name = name;
        return n;
      }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  static NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }
};

}  // namespace detail

//! Parsed arithmetic expression over an explicit variable scope.
class Expr {
 public:
  Expr() = default;

  //! allowed names are drawn from {"x1", "x2", "t"} depending on the slot.
  static Expr parse(std::string_view src, const std::vector<std::string>& allowed_vars) {
    Expr e;
    e.root_ = detail::Parser(src, allowed_vars).run();
    return e;
  }

  bool valid() const { return root_ != nullptr; }

  double operator()(const Env& env) const { return eval(*root_, env); }

  std::string str() const { return print(*root_); }

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.root_ && b.root_ && equal(*a.root_, *b.root_);
  }

 private:
  NodePtr root_;
};

}  // namespace varexp::expr

#endif  // VAREXP_EXPR_HPP
