#pragma once

#include "dedem/common.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace dedem::ad {

class Recording;

/// Reverse-mode scalar. A default-constructed or lifted value is a constant
/// with no provenance and combines with scalars of any recording.
class AdScalar {
 public:
  AdScalar() = default;
  AdScalar(double value) : value_(value) {}  // NOLINT: implicit lift of constants

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }
  const Recording* recording() const { return tape_; }
  std::int32_t index() const { return index_; }

 private:
  friend class Recording;
  AdScalar(double value, Recording* tape, std::int32_t index)
      : value_(value), tape_(tape), index_(index) {}

  double value_ = 0.0;
  Recording* tape_ = nullptr;
  std::int32_t index_ = -1;
};

/// Wengert list with variable fan-in nodes. Single owner; not thread-safe.
/// Every non-constant AdScalar refers to exactly one recording, and mixing
/// recordings in one operation throws.
class Recording {
 public:
  Recording() = default;
  Recording(const Recording&) = delete;
  Recording& operator=(const Recording&) = delete;

  /// Registers an independent variable; gradients are reported in
  /// registration order.
  AdScalar variable(double value);
  std::vector<AdScalar> variables(std::span<const double> values);

  /// Gradient of `output` with respect to every registered variable. A
  /// recording can be swept once; a second call throws.
  std::vector<double> backward(const AdScalar& output);

  bool consumed() const { return consumed_; }
  std::size_t node_count() const { return offsets_.size() - 1; }
  std::size_t variable_count() const { return variables_.size(); }

  // Node construction, used by the operator overloads.
  AdScalar unary(double value, const AdScalar& a, double da);
  AdScalar binary(double value, const AdScalar& a, double da, const AdScalar& b, double db);
  /// value = sum_i w_i * x_i with both sides possibly recorded.
  AdScalar dot(std::span<const AdScalar> w, std::span<const AdScalar> x, double offset = 0.0);
  AdScalar sum(std::span<const AdScalar> x);

 private:
  void check_owner(const AdScalar& a) const;
  void push_parent(const AdScalar& a, double partial);
  AdScalar finish(double value);

  std::vector<std::int32_t> parents_;
  std::vector<double> partials_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::int32_t> variables_;
  bool consumed_ = false;
};

/// Recording shared by the operands of a binary operation, or null if both
/// are constants. Throws if they belong to different recordings.
Recording* common_recording(const AdScalar& a, const AdScalar& b);

AdScalar operator+(const AdScalar& a, const AdScalar& b);
AdScalar operator-(const AdScalar& a, const AdScalar& b);
AdScalar operator*(const AdScalar& a, const AdScalar& b);
AdScalar operator/(const AdScalar& a, const AdScalar& b);
AdScalar operator-(const AdScalar& a);
inline AdScalar& operator+=(AdScalar& a, const AdScalar& b) { return a = a + b; }
inline AdScalar& operator-=(AdScalar& a, const AdScalar& b) { return a = a - b; }
inline AdScalar& operator*=(AdScalar& a, const AdScalar& b) { return a = a * b; }

AdScalar tanh(const AdScalar& a);
AdScalar exp(const AdScalar& a);
AdScalar log(const AdScalar& a);
AdScalar sqrt(const AdScalar& a);
AdScalar relu(const AdScalar& a);
AdScalar abs(const AdScalar& a);
AdScalar pow(const AdScalar& a, double p);
AdScalar min(const AdScalar& a, const AdScalar& b);
AdScalar max(const AdScalar& a, const AdScalar& b);

/// Value plus first spatial derivatives, each channel an AdScalar so the
/// derivatives can themselves be differentiated in reverse mode.
struct SpatialDual {
  AdScalar v;
  AdScalar dx1;
  AdScalar dx2;

  static SpatialDual constant(double c) { return {AdScalar(c), AdScalar(0.0), AdScalar(0.0)}; }
};

/// (x1 with d/dx = (1, 0), x2 with d/dx = (0, 1)).
std::pair<SpatialDual, SpatialDual> spatial_seed(const Vec2& x);

SpatialDual operator+(const SpatialDual& a, const SpatialDual& b);
SpatialDual operator-(const SpatialDual& a, const SpatialDual& b);
SpatialDual operator*(const SpatialDual& a, const SpatialDual& b);
SpatialDual operator/(const SpatialDual& a, const SpatialDual& b);
SpatialDual operator-(const SpatialDual& a);
SpatialDual operator+(const SpatialDual& a, const AdScalar& c);
SpatialDual operator*(const SpatialDual& a, const AdScalar& c);
SpatialDual operator*(const AdScalar& c, const SpatialDual& a);

SpatialDual tanh(const SpatialDual& a);
SpatialDual exp(const SpatialDual& a);
SpatialDual log(const SpatialDual& a);
SpatialDual sqrt(const SpatialDual& a);
SpatialDual relu(const SpatialDual& a);
SpatialDual abs(const SpatialDual& a);
SpatialDual pow(const SpatialDual& a, double p);
SpatialDual min(const SpatialDual& a, const SpatialDual& b);
SpatialDual max(const SpatialDual& a, const SpatialDual& b);

}  // namespace dedem::ad
