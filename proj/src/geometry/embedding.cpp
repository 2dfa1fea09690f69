#include "dedem/geometry/embedding.hpp"

namespace dedem::geometry {

namespace {

EmbeddingValue tip_factor(const Vec2& x, const CrackPath& path) {
  switch (path.tip_count()) {
    case 2: {
      const SignedDistance p1 = tip_tangential_sdf(x, path, TipEnd::Start);
      const SignedDistance p2 = tip_tangential_sdf(x, path, TipEnd::End);
      const double r = relu(p1.value * p2.value);
      return {r * r, 2.0 * r * (p2.value * p1.gradient + p1.value * p2.gradient)};
    }
    case 1: {
      const TipEnd end = path.is_tip(TipEnd::End) ? TipEnd::End : TipEnd::Start;
      const SignedDistance p = tip_tangential_sdf(x, path, end);
      const double r = relu(p.value);
      return {r * r, 2.0 * r * p.gradient};
    }
    default:
      return {1.0, Vec2::Zero()};
  }
}

}  // namespace

EmbeddingValue strong_embedding(const Vec2& x, const CrackPath& path) {
  return strong_embedding(x, path, sgn(sdf_polyline(x, path).value));
}

EmbeddingValue strong_embedding(const Vec2& x, const CrackPath& path, double side) {
  const EmbeddingValue f = tip_factor(x, path);
  return {side * f.value, side * f.gradient};
}

EmbeddingValue weak_embedding(const Vec2& x, const InterfaceShape& shape) {
  const SignedDistance d = shape.signed_distance(x);
  const double s = sgn(d.value);
  return {std::abs(d.value), s * d.gradient};
}

EmbeddedInput embed_inputs(const Vec2& x, std::span<const EmbeddingSpec> specs, double scale,
                           const std::optional<FaceSelector>& face) {
  const auto n = static_cast<Eigen::Index>(specs.size());
  EmbeddedInput out;
  out.values.resize(2 + n);
  out.jacobian.setZero(2 + n, 2);
  out.values[0] = x.x();
  out.values[1] = x.y();
  out.jacobian(0, 0) = 1.0;
  out.jacobian(1, 1) = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const EmbeddingSpec& spec = specs[static_cast<std::size_t>(k)];
    EmbeddingValue g;
    if (const auto* crack = std::get_if<CrackPath>(&spec.shape)) {
      if (face && face->crack_id == spec.id) {
        g = strong_embedding(x, *crack, face->side);
      } else {
        g = strong_embedding(x, *crack);
      }
    } else {
      g = weak_embedding(x, std::get<InterfaceShape>(spec.shape));
    }
    out.values[2 + k] = scale * g.value;
    out.jacobian.row(2 + k) = scale * g.gradient.transpose();
  }
  return out;
}

EmbeddedInput embed_inputs(const Vec2& x, std::span<const EmbeddingSpec> specs, double scale,
                           std::span<const double> sides) {
  if (sides.size() != specs.size()) throw Error("geometry", "one side entry per spec required");
  const auto n = static_cast<Eigen::Index>(specs.size());
  EmbeddedInput out;
  out.values.resize(2 + n);
  out.jacobian.setZero(2 + n, 2);
  out.values << x.x(), x.y(), Eigen::VectorXd::Zero(n);
  out.jacobian(0, 0) = 1.0;
  out.jacobian(1, 1) = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    EmbeddingValue g;
    if (const auto* crack = std::get_if<CrackPath>(&specs[i].shape)) {
      g = sides[i] != 0.0 ? strong_embedding(x, *crack, sgn(sides[i]))
                          : strong_embedding(x, *crack);
    } else {
      g = weak_embedding(x, std::get<InterfaceShape>(specs[i].shape));
    }
    out.values[2 + k] = scale * g.value;
    out.jacobian.row(2 + k) = scale * g.gradient.transpose();
  }
  return out;
}

}  // namespace dedem::geometry
