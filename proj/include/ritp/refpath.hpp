#pragma once

#include <span>
#include <vector>

#include "ritp/geometry.hpp"

namespace ritp {

/// One gear-consistent piece of the reference path.
struct PiecewisePath {
  std::vector<Vec2> points;
  std::vector<double> yaws;
  int zeta = 1;                     // +1 forward, -1 backward
  std::vector<double> arc_length;   // cumulative, arc_length[0] == 0

  std::size_t size() const { return points.size(); }
  double length() const { return arc_length.empty() ? 0.0 : arc_length.back(); }
  Pose pose(std::size_t k) const { return {points[k].x(), points[k].y(), yaws[k]}; }
};

/// Cumulative Euclidean travel distance, starting at 0.
inline std::vector<double> arc_lengths(std::span<const Vec2> points) {
  std::vector<double> s;
  if (points.empty()) return s;
  s.reserve(points.size());
  s.push_back(0.0);
  for (std::size_t k = 1; k < points.size(); ++k) {
    s.push_back(s.back() + (points[k] - points[k - 1]).norm());
  }
  return s;
}

/// Sign of the step displacement projected onto the heading at its start.
inline int motion_sign(const Pose& from, const Pose& to) {
  const double lon = (to.x - from.x) * std::cos(from.phi) + (to.y - from.y) * std::sin(from.phi);
  if (lon > 0.0) return 1;
  if (lon < 0.0) return -1;
  return 0;
}

/// Splits a pose sequence wherever the longitudinal motion flips sign (gear
/// shifting points). Consecutive pieces share their boundary pose.
inline std::vector<PiecewisePath> split_at_gsp(std::span<const Pose> path,
                                               double min_segment_length = 0.2) {
  if (path.size() < 2) throw Error(ErrorCode::InvalidInput, "path needs >= 2 poses");

  std::vector<PiecewisePath> out;
  PiecewisePath cur;
  auto push_pose = [](PiecewisePath& seg, const Pose& p) {
    seg.points.emplace_back(p.x, p.y);
    seg.yaws.push_back(p.phi);
  };
  push_pose(cur, path[0]);
  cur.zeta = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int sign = motion_sign(path[k - 1], path[k]);
    if (sign != 0 && cur.zeta != 0 && sign != cur.zeta) {
      out.push_back(std::move(cur));
      cur = PiecewisePath{};
      push_pose(cur, path[k - 1]);
      cur.zeta = 0;
    }
    if (cur.zeta == 0) cur.zeta = sign;
    push_pose(cur, path[k]);
  }
  out.push_back(std::move(cur));

  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& seg = out[i];
    if (seg.zeta == 0) seg.zeta = 1;
    seg.arc_length = arc_lengths(seg.points);
    if (seg.length() < min_segment_length) {
      throw Error(ErrorCode::DegenerateSegment,
                  "segment " + std::to_string(i) + " is " + std::to_string(seg.length()) +
                      " m long (< " + std::to_string(min_segment_length) + " m)");
    }
  }
  return out;
}

}  // namespace ritp
