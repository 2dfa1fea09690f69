#pragma once

#include "dedem/common.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dedem::config {

/// Spatial expression over x1, x2 used for hard-constraint factors, loads and
/// body forces. Immutable once parsed; safe to share across threads.
class Expression {
 public:
  enum class Kind {
    Constant,
    Variable,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Tanh,
    Abs,
    Sqrt,
    Relu,
    Sgn,
    Min,
    Max,
  };

  struct Node {
    Kind kind = Kind::Constant;
    double constant = 0.0;
    int variable = 0;  // 0 -> x1, 1 -> x2
    std::vector<std::shared_ptr<const Node>> args;
  };

  struct ValueGrad {
    double value = 0.0;
    Vec2 gradient = Vec2::Zero();
  };

  /// The constant 0.
  Expression();

  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double value(const Vec2& x) const { return evaluate(x).value; }

  /// Value and exact spatial gradient. Non-smooth functions use
  /// d|v|/dv = sgn(v), d relu/dv = [v > 0], d sgn/dv = 0.
  ValueGrad evaluate(const Vec2& x) const;

  /// Fully parenthesised text that parses back to an identical tree.
  std::string to_string() const;

  /// True if the tree contains no variable, i.e. the gradient is always zero.
  bool is_constant() const;

  const Node& root() const { return *root_; }

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;
};

std::string to_string(const Expression::Node& node);

}  // namespace dedem::config
