#pragma once

// A small expression language for real scalar functions.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | variable | parameter | func '(' sum ')' | '(' sum ')'
//
// Constants: pi, e. Functions: sin cos tan sinh cosh tanh exp ln abs sqrt.

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minlor/error.hpp"

namespace minlor::expr {

enum class Op { literal, constant, variable, parameter, neg, add, sub, mul, div, pow, call };

enum class Func { sin, cos, tan, sinh, cosh, tanh, exp, ln, abs, sqrt };

inline constexpr std::array<std::string_view, 10> kFuncNames{"sin",  "cos",  "tan", "sinh", "cosh",
                                                             "tanh", "exp",  "ln",  "abs",  "sqrt"};

inline std::optional<Func> lookup_function(std::string_view name) {
  for (std::size_t i = 0; i < kFuncNames.size(); ++i)
    if (kFuncNames[i] == name) return static_cast<Func>(i);
  return std::nullopt;
}

inline bool is_reserved(std::string_view name) {
  return name == "pi" || name == "e" || lookup_function(name).has_value();
}

struct Node {
  Op op = Op::literal;
  double value = 0.0;  // literal value
  int index = 0;       // variable slot, parameter slot, or constant id (0 = pi, 1 = e)
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

namespace detail {

inline double checked_pow(double base, double exponent) {
  if (base < 0.0 && exponent != std::nearbyint(exponent)) {
    throw Error(ErrorKind::non_finite, "negative base " + std::to_string(base) +
                                           " raised to non-integer exponent " +
                                           std::to_string(exponent));
  }
  return std::pow(base, exponent);
}

inline double apply(Func f, double x) {
  switch (f) {
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::tan: return std::tan(x);
    case Func::sinh: return std::sinh(x);
    case Func::cosh: return std::cosh(x);
    case Func::tanh: return std::tanh(x);
    case Func::exp: return std::exp(x);
    case Func::ln: return std::log(x);
    case Func::abs: return std::abs(x);
    case Func::sqrt: return std::sqrt(x);
  }
  return 0.0;
}

inline double evaluate(const Node& n, std::span<const double> vars, std::span<const double> params) {
  switch (n.op) {
    case Op::literal: return n.value;
    case Op::constant: return n.index == 0 ? std::numbers::pi : std::numbers::e;
    case Op::variable: return vars[static_cast<std::size_t>(n.index)];
    case Op::parameter:
      if (static_cast<std::size_t>(n.index) >= params.size()) {
        throw Error(ErrorKind::precondition, "unbound parameter in expression");
      }
      return params[static_cast<std::size_t>(n.index)];
    case Op::neg: return -evaluate(*n.lhs, vars, params);
    case Op::add: return evaluate(*n.lhs, vars, params) + evaluate(*n.rhs, vars, params);
    case Op::sub: return evaluate(*n.lhs, vars, params) - evaluate(*n.rhs, vars, params);
    case Op::mul: return evaluate(*n.lhs, vars, params) * evaluate(*n.rhs, vars, params);
    case Op::div: return evaluate(*n.lhs, vars, params) / evaluate(*n.rhs, vars, params);
    case Op::pow: return checked_pow(evaluate(*n.lhs, vars, params), evaluate(*n.rhs, vars, params));
    case Op::call: return apply(n.func, evaluate(*n.lhs, vars, params));
  }
  return 0.0;
}

// Precedence used by the printer: sum 1, product 2, unary 3, power 4, atom 5.
inline int precedence(const Node& n) {
  switch (n.op) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    case Op::literal: return n.value < 0.0 ? 3 : 5;
    default: return 5;
  }
}

inline std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), end);
}

}  // namespace detail

/// An immutable expression tree plus the names of its variable and
/// parameter slots. Copies share the tree.
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, std::vector<std::string> variables, std::vector<std::string> parameters)
      : root_(std::move(root)), variables_(std::move(variables)), parameters_(std::move(parameters)) {}

  const Node& root() const { return *root_; }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<std::string>& parameters() const { return parameters_; }

  /// Evaluates with explicit variable values and parameter values (by slot).
  /// Throws non_finite when the result is not a finite real.
  double eval(std::span<const double> vars, std::span<const double> params = {}) const {
    if (vars.size() < variables_.size()) {
      throw Error(ErrorKind::precondition, "expression needs " + std::to_string(variables_.size()) +
                                               " variable values");
    }
    const double r = detail::evaluate(*root_, vars, params);
    if (!std::isfinite(r)) {
      throw Error(ErrorKind::non_finite, "expression '" + to_string() + "' is not finite here");
    }
    return r;
  }

  double operator()(double u, double v = 0.0) const {
    const std::array<double, 2> vars{u, v};
    return eval(vars);
  }

  /// Replaces parameter slots by literal values. Every declared parameter
  /// must be present in `values`.
  Expression bind(const std::map<std::string, double>& values) const {
    std::vector<double> slots;
    for (const auto& name : parameters_) {
      auto it = values.find(name);
      if (it == values.end()) throw Error(ErrorKind::precondition, "parameter '" + name + "' not bound");
      if (!std::isfinite(it->second)) {
        throw Error(ErrorKind::non_finite, "parameter '" + name + "' bound to a non-finite value");
      }
      slots.push_back(it->second);
    }
    return Expression(substitute(root_, slots), variables_, {});
  }

  bool is_closed() const { return parameters_.empty(); }

  std::string to_string() const { return print(*root_); }

 private:
  static NodePtr substitute(const NodePtr& n, const std::vector<double>& slots) {
    if (!n) return n;
    if (n->op == Op::parameter) {
      auto lit = std::make_shared<Node>();
      lit->op = Op::literal;
      lit->value = slots[static_cast<std::size_t>(n->index)];
      return lit;
    }
    if (!n->lhs && !n->rhs) return n;
    auto copy = std::make_shared<Node>(*n);
    copy->lhs = substitute(n->lhs, slots);
    copy->rhs = substitute(n->rhs, slots);
    return copy;
  }

  std::string wrap(const Node& child, bool parens) const {
    return parens ? "(" + print(child) + ")" : print(child);
  }

  std::string print(const Node& n) const {
    using detail::precedence;
    switch (n.op) {
      case Op::literal:
        return n.value < 0.0 ? "(" + detail::format_number(n.value) + ")" : detail::format_number(n.value);
      case Op::constant: return n.index == 0 ? "pi" : "e";
      case Op::variable: return variables_[static_cast<std::size_t>(n.index)];
      case Op::parameter: return parameters_[static_cast<std::size_t>(n.index)];
      case Op::neg: return "-" + wrap(*n.lhs, precedence(*n.lhs) < 3);
      case Op::call:
        return std::string(kFuncNames[static_cast<std::size_t>(n.func)]) + "(" + print(*n.lhs) + ")";
      case Op::pow:
        return wrap(*n.lhs, precedence(*n.lhs) < 5) + "^" + wrap(*n.rhs, precedence(*n.rhs) < 3);
      default: {
        const int p = precedence(n);
        const char* sym = n.op == Op::add ? "+" : n.op == Op::sub ? "-" : n.op == Op::mul ? "*" : "/";
        // Left-associative: the right operand is parenthesised at equal
        // precedence so that the printed text reparses to the same tree.
        return wrap(*n.lhs, precedence(*n.lhs) < p) + sym + wrap(*n.rhs, precedence(*n.rhs) <= p);
      }
    }
  }

  NodePtr root_;
  std::vector<std::string> variables_;
  std::vector<std::string> parameters_;
};

struct ParseOptions {
  std::vector<std::string> variables{"u", "v"};
  std::vector<std::string> parameters;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {
    for (const auto& name : options_.variables)
      if (is_reserved(name)) throw Error(ErrorKind::precondition, "reserved variable name '" + name + "'");
    for (const auto& name : options_.parameters)
      if (is_reserved(name)) throw Error(ErrorKind::precondition, "reserved parameter name '" + name + "'");
  }

  NodePtr parse() {
    skip_ws();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "empty expression");
    NodePtr n = sum();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    return n;
  }

 private:
  static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, lhs, product());
      else if (accept('-')) lhs = make(Op::sub, lhs, product());
      else return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = sum();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    // Exponent only if digits follow, so "2e" stays "2" followed by constant e.
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        pos_ = p;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw SyntaxError(start, "malformed number");
    auto n = make(Op::literal);
    std::const_pointer_cast<Node>(n)->value = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (is_ident_start(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    skip_ws();
    const bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (auto f = lookup_function(name)) {
      if (!call) throw SyntaxError(pos_, "expected '(' after function '" + name + "'");
      ++pos_;
      NodePtr arg = sum();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')' closing call to '" + name + "'");
      auto n = std::const_pointer_cast<Node>(make(Op::call, arg));
      n->func = *f;
      return n;
    }
    if (call) throw UnknownIdentifierError(start, name);

    auto n = std::const_pointer_cast<Node>(make(Op::literal));
    if (name == "pi" || name == "e") {
      n->op = Op::constant;
      n->index = name == "pi" ? 0 : 1;
      return n;
    }
    for (std::size_t i = 0; i < options_.variables.size(); ++i) {
      if (options_.variables[i] == name) {
        n->op = Op::variable;
        n->index = static_cast<int>(i);
        return n;
      }
    }
    for (std::size_t i = 0; i < options_.parameters.size(); ++i) {
      if (options_.parameters[i] == name) {
        n->op = Op::parameter;
        n->index = static_cast<int>(i);
        return n;
      }
    }
    throw UnknownIdentifierError(start, name);
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse(std::string_view text, const ParseOptions& options = {}) {
  detail::Parser parser(text, options);
  NodePtr root = parser.parse();
  return Expression(std::move(root), options.variables, options.parameters);
}

/// Parses and binds in one step; parameter names are taken from `params`.
inline Expression parse_bound(std::string_view text, const std::map<std::string, double>& params,
                              std::vector<std::string> variables = {"u", "v"}) {
  ParseOptions options;
  options.variables = std::move(variables);
  for (const auto& [name, value] : params) options.parameters.push_back(name);
  return parse(text, options).bind(params);
}

}  // namespace minlor::expr
