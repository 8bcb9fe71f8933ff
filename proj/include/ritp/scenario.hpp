#pragma once

#include <cmath>
#include <vector>

#include "ritp/geometry.hpp"

namespace ritp {

struct Bounds {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  bool valid() const { return xmax > xmin && ymax > ymin; }
  bool contains(const Vec2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
};

/// A parking problem: static convex obstacles inside an axis-aligned workspace.
struct Scenario {
  VehicleGeom vehicle;
  std::vector<ConvexPolygon> obstacles;
  Bounds bounds;
  Pose start;
  Pose goal;
  double v_max = 2.0;
  double a_max = 1.0;

  /// Obstacles plus four wall slabs just outside the bounds, so that leaving
  /// the workspace is reported as a collision like any other.
  std::vector<ConvexPolygon> collision_set() const {
    std::vector<ConvexPolygon> all = obstacles;
    if (!bounds.valid()) return all;
    constexpr double kWall = 1.0;
    const Bounds& b = bounds;
    all.push_back(make_box(b.xmin - kWall, b.xmax + kWall, b.ymin - kWall, b.ymin));
    all.push_back(make_box(b.xmin - kWall, b.xmax + kWall, b.ymax, b.ymax + kWall));
    all.push_back(make_box(b.xmin - kWall, b.xmin, b.ymin, b.ymax));
    all.push_back(make_box(b.xmax, b.xmax + kWall, b.ymin, b.ymax));
    return all;
  }

  /// Structural checks only; collision of start/goal is left to the planner.
  void validate() const {
    if (!vehicle.valid()) throw Error(ErrorCode::InvalidScenario, "vehicle dimensions must be > 0");
    if (!(v_max > 0.0) || !(a_max > 0.0)) {
      throw Error(ErrorCode::InvalidScenario, "v_max and a_max must be > 0");
    }
    if (!bounds.valid()) throw Error(ErrorCode::InvalidScenario, "bounds are empty");
    for (const Pose* p : {&start, &goal}) {
      if (!std::isfinite(p->x) || !std::isfinite(p->y) || !std::isfinite(p->phi)) {
        throw Error(ErrorCode::InvalidScenario, "pose is not finite");
      }
    }
  }
};

}  // namespace ritp
