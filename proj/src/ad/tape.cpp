#include "dedem/ad/tape.hpp"

#include <cmath>
#include <limits>

namespace dedem::ad {

namespace {

[[noreturn]] void domain_error(const char* primitive, const std::string& what) {
  throw EvaluationError("autodiff", std::string(primitive) + ": " + what);
}

}  // namespace

void Recording::check_owner(const AdScalar& a) const {
  if (!a.is_constant() && a.recording() != this) {
    throw Error("autodiff", "operand belongs to a different recording");
  }
}

void Recording::push_parent(const AdScalar& a, double partial) {
  if (a.is_constant()) return;
  parents_.push_back(a.index());
  partials_.push_back(partial);
}

AdScalar Recording::finish(double value) {
  if (consumed_) throw Error("autodiff", "recording already consumed by backward()");
  offsets_.push_back(parents_.size());
  if (offsets_.size() - 1 > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw Error("autodiff", "recording exceeds the node limit");
  }
  return AdScalar(value, this, static_cast<std::int32_t>(offsets_.size() - 2));
}

AdScalar Recording::variable(double value) {
  AdScalar a = finish(value);
  variables_.push_back(a.index());
  return a;
}

std::vector<AdScalar> Recording::variables(std::span<const double> values) {
  std::vector<AdScalar> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(variable(v));
  return out;
}

AdScalar Recording::unary(double value, const AdScalar& a, double da) {
  if (a.is_constant()) return AdScalar(value);
  check_owner(a);
  push_parent(a, da);
  return finish(value);
}

AdScalar Recording::binary(double value, const AdScalar& a, double da, const AdScalar& b,
                           double db) {
  check_owner(a);
  check_owner(b);
  if (a.is_constant() && b.is_constant()) return AdScalar(value);
  push_parent(a, da);
  push_parent(b, db);
  return finish(value);
}

AdScalar Recording::dot(std::span<const AdScalar> w, std::span<const AdScalar> x, double offset) {
  if (w.size() != x.size()) throw Error("autodiff", "dot: length mismatch");
  double value = offset;
  bool any = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    check_owner(w[i]);
    check_owner(x[i]);
    value += w[i].value() * x[i].value();
    any = any || !w[i].is_constant() || !x[i].is_constant();
  }
  if (!any) return AdScalar(value);
  for (std::size_t i = 0; i < w.size(); ++i) {
    push_parent(w[i], x[i].value());
    push_parent(x[i], w[i].value());
  }
  return finish(value);
}

AdScalar Recording::sum(std::span<const AdScalar> x) {
  double value = 0.0;
  bool any = false;
  for (const auto& a : x) {
    check_owner(a);
    value += a.value();
    any = any || !a.is_constant();
  }
  if (!any) return AdScalar(value);
  for (const auto& a : x) push_parent(a, 1.0);
  return finish(value);
}

std::vector<double> Recording::backward(const AdScalar& output) {
  if (consumed_) throw Error("autodiff", "backward() called twice on the same recording");
  check_owner(output);
  consumed_ = true;
  std::vector<double> grad(variables_.size(), 0.0);
  if (output.is_constant()) return grad;
  std::vector<double> adj(node_count(), 0.0);
  adj[static_cast<std::size_t>(output.index())] = 1.0;
  for (std::size_t n = static_cast<std::size_t>(output.index()) + 1; n-- > 0;) {
    const double a = adj[n];
    if (a == 0.0) continue;
    for (std::size_t k = offsets_[n]; k < offsets_[n + 1]; ++k) {
      adj[static_cast<std::size_t>(parents_[k])] += a * partials_[k];
    }
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    grad[i] = adj[static_cast<std::size_t>(variables_[i])];
  }
  // Free the tape; the recording is single-use.
  parents_ = {};
  partials_ = {};
  return grad;
}

Recording* common_recording(const AdScalar& a, const AdScalar& b) {
  auto* ra = const_cast<Recording*>(a.recording());
  auto* rb = const_cast<Recording*>(b.recording());
  if (ra && rb && ra != rb) throw Error("autodiff", "operands belong to different recordings");
  return ra ? ra : rb;
}

namespace {

AdScalar make_unary(const AdScalar& a, double value, double da) {
  auto* r = const_cast<Recording*>(a.recording());
  if (!r) return AdScalar(value);
  return r->unary(value, a, da);
}

AdScalar make_binary(const AdScalar& a, const AdScalar& b, double value, double da, double db) {
  Recording* r = common_recording(a, b);
  if (!r) return AdScalar(value);
  return r->binary(value, a, da, b, db);
}

}  // namespace

AdScalar operator+(const AdScalar& a, const AdScalar& b) {
  return make_binary(a, b, a.value() + b.value(), 1.0, 1.0);
}

AdScalar operator-(const AdScalar& a, const AdScalar& b) {
  return make_binary(a, b, a.value() - b.value(), 1.0, -1.0);
}

AdScalar operator*(const AdScalar& a, const AdScalar& b) {
  return make_binary(a, b, a.value() * b.value(), b.value(), a.value());
}

AdScalar operator/(const AdScalar& a, const AdScalar& b) {
  if (b.value() == 0.0) domain_error("/", "division by zero");
  const double q = a.value() / b.value();
  return make_binary(a, b, q, 1.0 / b.value(), -q / b.value());
}

AdScalar operator-(const AdScalar& a) { return make_unary(a, -a.value(), -1.0); }

AdScalar tanh(const AdScalar& a) {
  const double t = std::tanh(a.value());
  return make_unary(a, t, 1.0 - t * t);
}

AdScalar exp(const AdScalar& a) {
  const double e = std::exp(a.value());
  return make_unary(a, e, e);
}

AdScalar log(const AdScalar& a) {
  if (!(a.value() > 0.0)) domain_error("log", "argument must be positive");
  return make_unary(a, std::log(a.value()), 1.0 / a.value());
}

AdScalar sqrt(const AdScalar& a) {
  if (a.value() < 0.0) domain_error("sqrt", "negative argument");
  const double s = std::sqrt(a.value());
  if (s == 0.0 && !a.is_constant()) domain_error("sqrt", "derivative undefined at 0");
  return make_unary(a, s, s > 0.0 ? 0.5 / s : 0.0);
}

AdScalar relu(const AdScalar& a) {
  return a.value() > 0.0 ? make_unary(a, a.value(), 1.0) : AdScalar(0.0);
}

AdScalar abs(const AdScalar& a) {
  const double s = sgn(a.value());
  return make_unary(a, std::abs(a.value()), s);
}

AdScalar pow(const AdScalar& a, double p) {
  const double v = a.value();
  const double y = std::pow(v, p);
  if (!std::isfinite(y)) domain_error("pow", "non-finite result");
  const double d = p == 0.0 ? 0.0 : p * std::pow(v, p - 1.0);
  if (!std::isfinite(d) && !a.is_constant()) domain_error("pow", "derivative undefined");
  return make_unary(a, y, d);
}

AdScalar min(const AdScalar& a, const AdScalar& b) {
  common_recording(a, b);
  return b.value() < a.value() ? b : a;
}

AdScalar max(const AdScalar& a, const AdScalar& b) {
  common_recording(a, b);
  return b.value() > a.value() ? b : a;
}

std::pair<SpatialDual, SpatialDual> spatial_seed(const Vec2& x) {
  return {{AdScalar(x.x()), AdScalar(1.0), AdScalar(0.0)},
          {AdScalar(x.y()), AdScalar(0.0), AdScalar(1.0)}};
}

SpatialDual operator+(const SpatialDual& a, const SpatialDual& b) {
  return {a.v + b.v, a.dx1 + b.dx1, a.dx2 + b.dx2};
}

SpatialDual operator-(const SpatialDual& a, const SpatialDual& b) {
  return {a.v - b.v, a.dx1 - b.dx1, a.dx2 - b.dx2};
}

SpatialDual operator*(const SpatialDual& a, const SpatialDual& b) {
  return {a.v * b.v, a.dx1 * b.v + a.v * b.dx1, a.dx2 * b.v + a.v * b.dx2};
}

SpatialDual operator/(const SpatialDual& a, const SpatialDual& b) {
  const AdScalar q = a.v / b.v;
  return {q, (a.dx1 - q * b.dx1) / b.v, (a.dx2 - q * b.dx2) / b.v};
}

SpatialDual operator-(const SpatialDual& a) { return {-a.v, -a.dx1, -a.dx2}; }

SpatialDual operator+(const SpatialDual& a, const AdScalar& c) { return {a.v + c, a.dx1, a.dx2}; }

SpatialDual operator*(const SpatialDual& a, const AdScalar& c) {
  return {a.v * c, a.dx1 * c, a.dx2 * c};
}

SpatialDual operator*(const AdScalar& c, const SpatialDual& a) { return a * c; }

namespace {

// Chain rule with the outer derivative expressed as an AdScalar.
SpatialDual chain(const AdScalar& value, const AdScalar& outer, const SpatialDual& a) {
  return {value, outer * a.dx1, outer * a.dx2};
}

}  // namespace

SpatialDual tanh(const SpatialDual& a) {
  const AdScalar t = tanh(a.v);
  return chain(t, AdScalar(1.0) - t * t, a);
}

SpatialDual exp(const SpatialDual& a) {
  const AdScalar e = exp(a.v);
  return chain(e, e, a);
}

SpatialDual log(const SpatialDual& a) {
  const AdScalar l = log(a.v);
  return chain(l, AdScalar(1.0) / a.v, a);
}

SpatialDual sqrt(const SpatialDual& a) {
  const AdScalar s = sqrt(a.v);
  return chain(s, AdScalar(0.5) / s, a);
}

SpatialDual relu(const SpatialDual& a) {
  if (a.v.value() > 0.0) return a;
  return SpatialDual::constant(0.0);
}

SpatialDual abs(const SpatialDual& a) {
  const double s = sgn(a.v.value());
  return {abs(a.v), a.dx1 * AdScalar(s), a.dx2 * AdScalar(s)};
}

SpatialDual pow(const SpatialDual& a, double p) {
  const AdScalar y = pow(a.v, p);
  if (p == 0.0) return SpatialDual::constant(1.0);
  return chain(y, AdScalar(p) * pow(a.v, p - 1.0), a);
}

SpatialDual min(const SpatialDual& a, const SpatialDual& b) {
  return b.v.value() < a.v.value() ? b : a;
}

SpatialDual max(const SpatialDual& a, const SpatialDual& b) {
  return b.v.value() > a.v.value() ? b : a;
}

}  // namespace dedem::ad
