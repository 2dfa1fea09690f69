#include "dedem/config/expression.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace dedem::config {

namespace {

using Kind = Expression::Kind;
using NodePtr = std::shared_ptr<const Expression::Node>;

struct FunctionInfo {
  std::string_view name;
  Kind kind;
  int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Kind::Sin, 1},   {"cos", Kind::Cos, 1},   {"tanh", Kind::Tanh, 1},
    {"abs", Kind::Abs, 1},   {"sqrt", Kind::Sqrt, 1}, {"relu", Kind::Relu, 1},
    {"sgn", Kind::Sgn, 1},   {"min", Kind::Min, 2},   {"max", Kind::Max, 2},
};

NodePtr make(Kind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

NodePtr make_constant(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Constant;
  n->constant = v;
  return n;
}

NodePtr make_variable(int index) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Variable;
  n->variable = index;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    NodePtr n = parse_sum();
    skip_space();
    if (pos_ < text_.size()) {
      if (text_[pos_] == ')') fail("unbalanced parentheses: unexpected ')'");
      fail(std::string("unexpected character '") + text_[pos_] + "'");
    }
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("expression: " + message, line, col);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::Add, {lhs, parse_product()});
      } else if (accept('-')) {
        lhs = make(Kind::Sub, {lhs, parse_product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::Mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make(Kind::Div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Kind::Neg, {parse_unary()});
    return parse_power();
  }

  // ^ binds tighter than unary minus and is right associative; its exponent
  // may itself carry a leading minus (2^-1).
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Kind::Pow, {base, parse_exponent()});
    return base;
  }

  NodePtr parse_exponent() {
    if (accept('-')) return make(Kind::Neg, {parse_exponent()});
    return parse_power();
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')')) fail("unbalanced parentheses: missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (c == ')') fail("unbalanced parentheses: unexpected ')'");
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make_constant(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x1") return make_variable(0);
    if (name == "x2") return make_variable(1);
    for (const auto& f : kFunctions) {
      if (f.name != name) continue;
      if (!accept('(')) fail("expected '(' after function '" + std::string(name) + "'");
      std::vector<NodePtr> args;
      args.push_back(parse_sum());
      for (int i = 1; i < f.arity; ++i) {
        if (!accept(',')) fail("function '" + std::string(name) + "' expects " +
                               std::to_string(f.arity) + " arguments");
        args.push_back(parse_sum());
      }
      if (!accept(')')) fail("unbalanced parentheses: missing ')' after arguments of '" +
                             std::string(name) + "'");
      return make(f.kind, std::move(args));
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string_view function_name(Kind kind) {
  for (const auto& f : kFunctions) {
    if (f.kind == kind) return f.name;
  }
  return {};
}

std::string format_constant(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void eval_fail(const Expression::Node& node, const std::string& what) {
  throw EvaluationError("config_io", "expression evaluation failed: " + what + " in '" +
                                         to_string(node) + "'");
}

Expression::ValueGrad eval(const Expression::Node& n, const Vec2& x) {
  using VG = Expression::ValueGrad;
  switch (n.kind) {
    case Kind::Constant:
      return {n.constant, Vec2::Zero()};
    case Kind::Variable: {
      VG r{x[n.variable], Vec2::Zero()};
      r.gradient[n.variable] = 1.0;
      return r;
    }
    default:
      break;
  }

  const VG a = eval(*n.args[0], x);
  switch (n.kind) {
    case Kind::Neg:
      return {-a.value, -a.gradient};
    case Kind::Sin:
      return {std::sin(a.value), std::cos(a.value) * a.gradient};
    case Kind::Cos:
      return {std::cos(a.value), -std::sin(a.value) * a.gradient};
    case Kind::Tanh: {
      const double t = std::tanh(a.value);
      return {t, (1.0 - t * t) * a.gradient};
    }
    case Kind::Abs:
      return {std::abs(a.value), sgn(a.value) * a.gradient};
    case Kind::Relu:
      return {relu(a.value), a.value > 0.0 ? Vec2(a.gradient) : Vec2(Vec2::Zero())};
    case Kind::Sgn:
      return {sgn(a.value), Vec2::Zero()};
    case Kind::Sqrt: {
      if (a.value < 0.0) eval_fail(n, "sqrt of negative value " + format_constant(a.value));
      const double s = std::sqrt(a.value);
      if (s == 0.0) {
        if (!a.gradient.isZero(0.0)) eval_fail(n, "sqrt derivative is unbounded at 0");
        return {0.0, Vec2::Zero()};
      }
      return {s, a.gradient / (2.0 * s)};
    }
    default:
      break;
  }

  const VG b = eval(*n.args[1], x);
  switch (n.kind) {
    case Kind::Add:
      return {a.value + b.value, a.gradient + b.gradient};
    case Kind::Sub:
      return {a.value - b.value, a.gradient - b.gradient};
    case Kind::Mul:
      return {a.value * b.value, b.value * a.gradient + a.value * b.gradient};
    case Kind::Div: {
      if (b.value == 0.0) eval_fail(n, "division by zero");
      const double q = a.value / b.value;
      return {q, (a.gradient - q * b.gradient) / b.value};
    }
    case Kind::Pow: {
      const double v = std::pow(a.value, b.value);
      if (!std::isfinite(v)) eval_fail(n, "non-finite power");
      Vec2 g = Vec2::Zero();
      if (!a.gradient.isZero(0.0)) {
        const double da = b.value * std::pow(a.value, b.value - 1.0);
        if (!std::isfinite(da)) eval_fail(n, "power derivative is unbounded");
        g += da * a.gradient;
      }
      if (!b.gradient.isZero(0.0)) {
        if (a.value <= 0.0) eval_fail(n, "variable exponent requires a positive base");
        g += v * std::log(a.value) * b.gradient;
      }
      return {v, g};
    }
    case Kind::Min:
      return a.value <= b.value ? a : b;
    case Kind::Max:
      return a.value >= b.value ? a : b;
    default:
      break;
  }
  eval_fail(n, "unsupported node");
}

bool has_variable(const Expression::Node& n) {
  if (n.kind == Kind::Variable) return true;
  for (const auto& a : n.args) {
    if (has_variable(*a)) return true;
  }
  return false;
}

bool equal(const Expression::Node& a, const Expression::Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  if (a.kind == Kind::Constant) {
    return std::bit_cast<std::uint64_t>(a.constant) == std::bit_cast<std::uint64_t>(b.constant);
  }
  if (a.kind == Kind::Variable) return a.variable == b.variable;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace

Expression::Expression() : root_(make_constant(0.0)) {}

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

Expression Expression::constant(double value) { return Expression(make_constant(value)); }

Expression::ValueGrad Expression::evaluate(const Vec2& x) const {
  ValueGrad r = eval(*root_, x);
  if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
    eval_fail(*root_, "non-finite result");
  }
  return r;
}

std::string Expression::to_string() const { return config::to_string(*root_); }

bool Expression::is_constant() const { return !has_variable(*root_); }

bool operator==(const Expression& a, const Expression& b) { return equal(*a.root_, *b.root_); }

std::string to_string(const Expression::Node& n) {
  switch (n.kind) {
    case Kind::Constant:
      return format_constant(n.constant);
    case Kind::Variable:
      return n.variable == 0 ? "x1" : "x2";
    case Kind::Neg:
      return "(-" + to_string(*n.args[0]) + ")";
    case Kind::Add:
      return "(" + to_string(*n.args[0]) + " + " + to_string(*n.args[1]) + ")";
    case Kind::Sub:
      return "(" + to_string(*n.args[0]) + " - " + to_string(*n.args[1]) + ")";
    case Kind::Mul:
      return "(" + to_string(*n.args[0]) + " * " + to_string(*n.args[1]) + ")";
    case Kind::Div:
      return "(" + to_string(*n.args[0]) + " / " + to_string(*n.args[1]) + ")";
    case Kind::Pow:
      return "(" + to_string(*n.args[0]) + " ^ " + to_string(*n.args[1]) + ")";
    default: {
      std::string s(function_name(n.kind));
      s += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(*n.args[i]);
      }
      return s + ')';
    }
  }
}

}  // namespace dedem::config
