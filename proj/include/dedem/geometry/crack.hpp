#pragma once

#include "dedem/common.hpp"

#include <string>
#include <vector>

namespace dedem::geometry {

enum class TipEnd { Start, End };

/// Signed distance with its spatial gradient. `segment` is the index of the
/// nearest polyline segment (0 for analytic shapes).
struct SignedDistance {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  std::size_t segment = 0;
  Vec2 closest = Vec2::Zero();
};

/// Crack polyline. Endpoints flagged as tips are free crack fronts; an
/// endpoint lying on the domain boundary is not a tip. The positive side of
/// the crack is the left-hand side of the traversal direction.
class CrackPath {
 public:
  CrackPath() = default;
  CrackPath(std::string id, std::vector<Vec2> vertices, bool start_is_tip, bool end_is_tip);

  const std::string& id() const { return id_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }

  bool is_tip(TipEnd end) const { return end == TipEnd::Start ? start_is_tip_ : end_is_tip_; }
  int tip_count() const { return int(start_is_tip_) + int(end_is_tip_); }
  Vec2 endpoint(TipEnd end) const {
    return end == TipEnd::Start ? vertices_.front() : vertices_.back();
  }

  /// Unit tangent of the end segment pointing out of the crack at `end`.
  Vec2 outward_tangent(TipEnd end) const;
  /// Unit tangent of segment i in traversal direction.
  Vec2 segment_tangent(std::size_t i) const;
  /// Left-hand unit normal of segment i.
  Vec2 segment_normal(std::size_t i) const;
  double length() const;

  /// Copy with a new vertex appended beyond `end`; that end stays a tip.
  CrackPath extended(TipEnd end, const Vec2& new_tip) const;

 private:
  std::string id_;
  std::vector<Vec2> vertices_;
  bool start_is_tip_ = false;
  bool end_is_tip_ = false;
};

/// Material interface or inclusion boundary.
class InterfaceShape {
 public:
  enum class Kind { Line, Circle };

  static InterfaceShape line(const Vec2& point, const Vec2& unit_normal);
  static InterfaceShape circle(const Vec2& center, double radius);

  Kind kind() const { return kind_; }
  const Vec2& point() const { return point_; }
  const Vec2& normal() const { return normal_; }
  const Vec2& center() const { return point_; }
  double radius() const { return radius_; }

  /// Line: n.(x - p). Circle: |x - c| - r (positive outside).
  SignedDistance signed_distance(const Vec2& x) const;

 private:
  Kind kind_ = Kind::Line;
  Vec2 point_ = Vec2::Zero();
  Vec2 normal_ = Vec2(0.0, 1.0);
  double radius_ = 0.0;
};

/// Signed distance to a polyline: |phi| is the distance to the nearest point,
/// the sign is sgn(n . (x - closest)) with n the left normal of the nearest
/// segment (ties go to the earlier segment). On the path the gradient is that
/// segment normal.
SignedDistance sdf_polyline(const Vec2& x, const CrackPath& path);

/// psi = t . (x_tip - x) with t the outward tip tangent; positive on the crack
/// side of the tip plane. Throws if `end` is not a tip.
SignedDistance tip_tangential_sdf(const Vec2& x, const CrackPath& path, TipEnd end);

}  // namespace dedem::geometry
