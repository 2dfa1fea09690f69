#pragma once

#include "dedem/geometry/crack.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <variant>

namespace dedem::geometry {

struct EmbeddingValue {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Strong (displacement-jump) embedding of a crack:
///   two tips: relu(psi1 psi2)^2 sgn(phi), one tip: relu(psi)^2 sgn(phi),
///   no tips: sgn(phi).
/// The gradient is the exact derivative away from the crack; the sign factor
/// contributes nothing.
EmbeddingValue strong_embedding(const Vec2& x, const CrackPath& path);

/// Same, with sgn(phi) replaced by `side` (+1 or -1). Used to evaluate the two
/// crack faces at a point lying on the crack.
EmbeddingValue strong_embedding(const Vec2& x, const CrackPath& path, double side);

/// Weak (kink) embedding |phi| of an interface with gradient sgn(phi) grad(phi).
EmbeddingValue weak_embedding(const Vec2& x, const InterfaceShape& shape);

struct EmbeddingSpec {
  std::string id;
  std::variant<CrackPath, InterfaceShape> shape;

  bool is_strong() const { return std::holds_alternative<CrackPath>(shape); }
};

/// Forces the face of one crack when the evaluation point lies on it.
struct FaceSelector {
  std::string crack_id;
  double side = 1.0;
};

/// Augmented network input (x1, x2, scale*gamma_1, ..., scale*gamma_n) and its
/// (2+n) x 2 Jacobian with respect to (x1, x2).
struct EmbeddedInput {
  Eigen::VectorXd values;
  Eigen::Matrix<double, Eigen::Dynamic, 2> jacobian;
};

EmbeddedInput embed_inputs(const Vec2& x, std::span<const EmbeddingSpec> specs,
                           double scale = 1.0,
                           const std::optional<FaceSelector>& face = std::nullopt);

/// Variant with one entry per spec: a nonzero sides[k] forces the face of
/// strong spec k, zero keeps the natural sign. Weak specs ignore the entry.
EmbeddedInput embed_inputs(const Vec2& x, std::span<const EmbeddingSpec> specs, double scale,
                           std::span<const double> sides);

}  // namespace dedem::geometry
