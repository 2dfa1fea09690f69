#include "dedem/geometry/crack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dedem::geometry {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Proper or touching intersection of closed segments [p1,p2] and [q1,q2].
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

CrackPath::CrackPath(std::string id, std::vector<Vec2> vertices, bool start_is_tip,
                     bool end_is_tip)
    : id_(std::move(id)),
      vertices_(std::move(vertices)),
      start_is_tip_(start_is_tip),
      end_is_tip_(end_is_tip) {
  if (vertices_.size() < 2) {
    throw Error("geometry", "crack '" + id_ + "' needs at least 2 vertices");
  }
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw Error("geometry", "crack '" + id_ + "' has a non-finite vertex");
  }
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    if (vertices_[i] == vertices_[i + 1]) {
      throw Error("geometry", "crack '" + id_ + "' has repeated consecutive vertices at index " +
                                  std::to_string(i));
    }
  }
  const std::size_t n = segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& a0 = vertices_[i];
      const Vec2& a1 = vertices_[i + 1];
      const Vec2& b0 = vertices_[j];
      const Vec2& b1 = vertices_[j + 1];
      if (j == i + 1) {
        // Adjacent segments share a vertex; they must not fold back onto each other.
        const Vec2 u = a0 - a1;
        const Vec2 w = b1 - b0;
        if (cross(u, w) == 0.0 && u.dot(w) > 0.0) {
          throw Error("geometry", "crack '" + id_ + "' folds back on itself at vertex " +
                                      std::to_string(j));
        }
        continue;
      }
      if (segments_intersect(a0, a1, b0, b1)) {
        throw Error("geometry", "crack '" + id_ + "' self-intersects (segments " +
                                    std::to_string(i) + " and " + std::to_string(j) + ")");
      }
    }
  }
  if (start_is_tip_ && end_is_tip_ && vertices_.front() == vertices_.back()) {
    throw Error("geometry", "crack '" + id_ + "' has coincident tips");
  }
}

Vec2 CrackPath::segment_tangent(std::size_t i) const {
  return (vertices_[i + 1] - vertices_[i]).normalized();
}

Vec2 CrackPath::segment_normal(std::size_t i) const {
  const Vec2 t = segment_tangent(i);
  return Vec2(-t.y(), t.x());
}

Vec2 CrackPath::outward_tangent(TipEnd end) const {
  if (end == TipEnd::End) return segment_tangent(segment_count() - 1);
  return -segment_tangent(0);
}

double CrackPath::length() const {
  double l = 0.0;
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) l += (vertices_[i + 1] - vertices_[i]).norm();
  return l;
}

CrackPath CrackPath::extended(TipEnd end, const Vec2& new_tip) const {
  std::vector<Vec2> v = vertices_;
  if (end == TipEnd::End) {
    v.push_back(new_tip);
  } else {
    v.insert(v.begin(), new_tip);
  }
  return CrackPath(id_, std::move(v), start_is_tip_ || end == TipEnd::Start,
                   end_is_tip_ || end == TipEnd::End);
}

InterfaceShape InterfaceShape::line(const Vec2& point, const Vec2& unit_normal) {
  if (!point.allFinite() || !unit_normal.allFinite() || std::abs(unit_normal.norm() - 1.0) > 1e-12) {
    throw Error("geometry", "interface line normal must have unit length");
  }
  InterfaceShape s;
  s.kind_ = Kind::Line;
  s.point_ = point;
  s.normal_ = unit_normal;
  return s;
}

InterfaceShape InterfaceShape::circle(const Vec2& center, double radius) {
  if (!center.allFinite() || !(radius > 0.0) || !std::isfinite(radius)) {
    throw Error("geometry", "interface circle radius must be positive");
  }
  InterfaceShape s;
  s.kind_ = Kind::Circle;
  s.point_ = center;
  s.radius_ = radius;
  return s;
}

SignedDistance InterfaceShape::signed_distance(const Vec2& x) const {
  SignedDistance r;
  if (kind_ == Kind::Line) {
    r.value = normal_.dot(x - point_);
    r.gradient = normal_;
    r.closest = x - r.value * normal_;
    return r;
  }
  const Vec2 d = x - point_;
  const double dist = d.norm();
  r.value = dist - radius_;
  if (dist > 0.0) {
    r.gradient = d / dist;
    r.closest = point_ + radius_ * r.gradient;
  } else {
    r.closest = point_ + Vec2(radius_, 0.0);
  }
  return r;
}

SignedDistance sdf_polyline(const Vec2& x, const CrackPath& path) {
  const auto& v = path.vertices();
  double best = std::numeric_limits<double>::infinity();
  SignedDistance r;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Vec2 ab = v[i + 1] - v[i];
    double t = (x - v[i]).dot(ab) / ab.squaredNorm();
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 p = v[i] + t * ab;
    const double d = (x - p).norm();
    if (d < best) {
      best = d;
      r.segment = i;
      r.closest = p;
    }
  }
  const Vec2 n = path.segment_normal(r.segment);
  const Vec2 offset = x - r.closest;
  const double s = sgn(n.dot(offset));
  r.value = s * best;
  r.gradient = best > 0.0 ? Vec2(s * offset / best) : n;
  return r;
}

SignedDistance tip_tangential_sdf(const Vec2& x, const CrackPath& path, TipEnd end) {
  if (!path.is_tip(end)) {
    throw Error("geometry", std::string("crack '") + path.id() + "': " +
                                (end == TipEnd::Start ? "start" : "end") + " point is not a tip");
  }
  const Vec2 tip = path.endpoint(end);
  const Vec2 t = path.outward_tangent(end);
  SignedDistance r;
  r.value = t.dot(tip - x);
  r.gradient = -t;
  r.segment = end == TipEnd::Start ? 0 : path.segment_count() - 1;
  r.closest = x + r.value * t;
  return r;
}

}  // namespace dedem::geometry
