#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "ritp/errors.hpp"

namespace ritp {

using Vec2 = Eigen::Vector2d;

/// Tolerance for containment and orientation tests, in meters.
inline constexpr double kGeomTol = 1e-9;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rear-axle pose.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(phi), std::sin(phi)}; }
};

struct VehicleGeom {
  double wheelbase = 2.8;      // L
  double width = 1.9;          // W
  double front_overhang = 0.7; // a_f, front axle to front bumper
  double rear_overhang = 0.8;  // a_r, rear axle to rear bumper

  double length() const { return wheelbase + front_overhang + rear_overhang; }

  bool valid() const {
    return wheelbase > 0.0 && width > 0.0 && front_overhang > 0.0 && rear_overhang > 0.0;
  }

  /// Grows the body by `margin` on every side.
  VehicleGeom inflated(double margin) const {
    return {wheelbase, width + 2.0 * margin, front_overhang + margin, rear_overhang + margin};
  }
};

struct Aabb {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};

  bool overlaps(const Aabb& o, double tol = kGeomTol) const {
    return lo.x() <= o.hi.x() + tol && o.lo.x() <= hi.x() + tol && lo.y() <= o.hi.y() + tol &&
           o.lo.y() <= hi.y() + tol;
  }
};

/// Counterclockwise, strictly convex polygon.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  /// Accepts either orientation; clockwise input is reversed. Throws
  /// InvalidInput when fewer than 3 vertices or not strictly convex.
  explicit ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw Error(ErrorCode::InvalidInput, "polygon needs >= 3 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      area2 += cross2(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    }
    if (area2 < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[(i + 1) % n];
      const Vec2& c = vertices_[(i + 2) % n];
      if (cross2(b - a, c - b) <= kGeomTol) {
        throw Error(ErrorCode::InvalidInput, "polygon is not strictly convex");
      }
    }
    update_box();
  }

  /// Skips validation; the caller guarantees a CCW convex vertex list.
  static ConvexPolygon from_ccw_unchecked(std::vector<Vec2> vertices) {
    ConvexPolygon p;
    p.vertices_ = std::move(vertices);
    p.update_box();
    return p;
  }

  std::span<const Vec2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Aabb& box() const { return box_; }

  double area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      a += cross2(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    }
    return 0.5 * a;
  }

 private:
  void update_box() {
    box_.lo = box_.hi = vertices_.front();
    for (const auto& v : vertices_) {
      box_.lo = box_.lo.cwiseMin(v);
      box_.hi = box_.hi.cwiseMax(v);
    }
  }

  std::vector<Vec2> vertices_;
  Aabb box_;
};

inline ConvexPolygon make_box(double xmin, double xmax, double ymin, double ymax) {
  return ConvexPolygon::from_ccw_unchecked({{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}});
}

/// Body rectangle: a_r behind the rear axle to L + a_f ahead of it, width W.
inline ConvexPolygon footprint(const Pose& pose, const VehicleGeom& geom) {
  const double c = std::cos(pose.phi);
  const double s = std::sin(pose.phi);
  const double front = geom.wheelbase + geom.front_overhang;
  const double back = -geom.rear_overhang;
  const double half = 0.5 * geom.width;
  auto place = [&](double lon, double lat) {
    return Vec2{pose.x + c * lon - s * lat, pose.y + s * lon + c * lat};
  };
  return ConvexPolygon::from_ccw_unchecked(
      {place(back, -half), place(front, -half), place(front, half), place(back, half)});
}

/// Inside or on the boundary (within kGeomTol) counts as contained.
inline bool point_in_convex(const Vec2& p, const ConvexPolygon& poly) {
  const auto v = poly.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = v[(i + 1) % n] - v[i];
    const double len = edge.norm();
    if (cross2(edge, p - v[i]) < -kGeomTol * len) return false;
  }
  return true;
}

namespace detail {

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const double len = std::max(ab.norm(), 1.0);
  const double o = cross2(ab, c - a);
  if (o > kGeomTol * len) return 1;
  if (o < -kGeomTol * len) return -1;
  return 0;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return p.x() <= std::max(a.x(), b.x()) + kGeomTol && p.x() >= std::min(a.x(), b.x()) - kGeomTol &&
         p.y() <= std::max(a.y(), b.y()) + kGeomTol && p.y() >= std::min(a.y(), b.y()) - kGeomTol;
}

}  // namespace detail

/// Closed-segment intersection; touching endpoints count.
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// Overlap test: vertex containment in both directions plus edge-edge
/// crossings. Containment alone misses "+"-shaped overlaps. Touching counts.
inline bool collide(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (!a.box().overlaps(b.box())) return false;
  for (const auto& v : a.vertices()) {
    if (point_in_convex(v, b)) return true;
  }
  for (const auto& v : b.vertices()) {
    if (point_in_convex(v, a)) return true;
  }
  const auto va = a.vertices();
  const auto vb = b.vertices();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const Vec2& a1 = va[i];
    const Vec2& a2 = va[(i + 1) % va.size()];
    for (std::size_t j = 0; j < vb.size(); ++j) {
      if (segments_intersect(a1, a2, vb[j], vb[(j + 1) % vb.size()])) return true;
    }
  }
  return false;
}

inline bool collision_free_pose(const Pose& pose, const VehicleGeom& geom,
                                std::span<const ConvexPolygon> obstacles) {
  if (obstacles.empty()) return true;
  const ConvexPolygon body = footprint(pose, geom);
  return std::none_of(obstacles.begin(), obstacles.end(),
                      [&](const ConvexPolygon& obs) { return collide(body, obs); });
}

}  // namespace ritp
