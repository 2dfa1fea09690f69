#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dedem {

using Vec2 = Eigen::Vector2d;

/// Sign with the convention sgn(0) = -1 used by every embedding and kink rule.
inline double sgn(double v) { return v > 0.0 ? 1.0 : -1.0; }

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

/// Axis-aligned rectangle in metres.
struct Rect {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double diagonal() const { return std::hypot(width(), height()); }
  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= x_min - tol && p.x() <= x_max + tol && p.y() >= y_min - tol &&
           p.y() <= y_max + tol;
  }
  bool on_boundary(const Vec2& p, double tol) const {
    return contains(p, tol) && (std::abs(p.x() - x_min) <= tol || std::abs(p.x() - x_max) <= tol ||
                                std::abs(p.y() - y_min) <= tol || std::abs(p.y() - y_max) <= tol);
  }
};

/// Base of all library errors. `module()` names the component that raised it
/// so the CLI can emit module-qualified one-line diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Syntax error in a scenario file or expression, with 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("config_io", message + " at line " + std::to_string(line) +
                               ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A well-formed file whose content violates a scenario invariant.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : Error("config_io", field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Domain failure during numeric evaluation (division by zero, sqrt of a
/// negative, log of a non-positive value, ...).
class EvaluationError : public Error {
 public:
  EvaluationError(std::string module, const std::string& message)
      : Error(std::move(module), message) {}
};

}  // namespace dedem
