#pragma once

// Hybrid A* over (x, y, heading) with arc motion primitives and Reeds-Shepp
// goal connection. Produces the coarse, collision-free reference path that the
// path optimizer later smooths.

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>
#include <vector>

#include "ritp/geometry.hpp"
#include "ritp/reeds_shepp.hpp"
#include "ritp/scenario.hpp"

namespace ritp {

struct SearchConfig {
  double xy_resolution = 0.2;       // m per grid cell
  int heading_bins = 72;
  double primitive_length = 0.5;    // m of travel per expansion
  double path_resolution = 0.1;     // spacing of emitted poses
  double max_steer = 0.6;           // rad
  int steer_samples = 5;            // odd, symmetric around 0
  double reverse_penalty = 1.5;     // cost multiplier on reverse travel
  double gear_switch_penalty = 3.0;
  double steer_penalty = 0.1;       // per m at full lock
  double steer_change_penalty = 0.2;
  double inflation = 0.1;           // obstacle clearance margin, m
  double clearance = 0.5;           // soft margin: closer poses pay extra
  double clearance_weight = 2.0;    // extra cost per m at zero distance
  double min_gear_run = 0.5;        // shortest admissible constant-gear stretch
  int analytic_every = 3;           // try a goal connection every n expansions
  int analytic_candidates = 6;
  int max_expansions = 100000;

  double min_turn_radius(double wheelbase) const { return wheelbase / std::tan(max_steer); }
};

namespace detail {

/// Distance from a point to a convex polygon (0 inside).
inline double point_polygon_distance(const Vec2& p, const ConvexPolygon& poly) {
  if (point_in_convex(p, poly)) return 0.0;
  const auto v = poly.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + t * ab - p).norm());
  }
  return best;
}

/// Distance between two convex polygons (0 when they touch or overlap).
inline double polygon_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (collide(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& v : a.vertices()) best = std::min(best, point_polygon_distance(v, b));
  for (const Vec2& v : b.vertices()) best = std::min(best, point_polygon_distance(v, a));
  return best;
}

/// 8-connected obstacle-aware distance-to-goal field for the rear axle.
class HolonomicHeuristic {
 public:
  HolonomicHeuristic(const Scenario& sc, const std::vector<ConvexPolygon>& obstacles,
                     double resolution, double clearance)
      : b_(sc.bounds), res_(resolution) {
    nx_ = static_cast<int>(std::ceil((b_.xmax - b_.xmin) / res_)) + 1;
    ny_ = static_cast<int>(std::ceil((b_.ymax - b_.ymin) / res_)) + 1;
    dist_.assign(static_cast<std::size_t>(nx_) * ny_, kInf);
    std::vector<char> blocked(dist_.size(), 0);
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        const Vec2 c{b_.xmin + i * res_, b_.ymin + j * res_};
        for (const auto& o : obstacles) {
          if (point_polygon_distance(c, o) < clearance) {
            blocked[idx(i, j)] = 1;
            break;
          }
        }
      }
    }
    const auto [gi, gj] = cell(sc.goal.position());
    blocked[idx(gi, gj)] = 0;

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist_[idx(gi, gj)] = 0.0;
    open.emplace(0.0, idx(gi, gj));
    constexpr int kDi[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    constexpr int kDj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!open.empty()) {
      const auto [d, id] = open.top();
      open.pop();
      if (d > dist_[id]) continue;
      const int i = id % nx_;
      const int j = id / nx_;
      for (int k = 0; k < 8; ++k) {
        const int ni = i + kDi[k];
        const int nj = j + kDj[k];
        if (ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_) continue;
        const int nid = idx(ni, nj);
        if (blocked[nid]) continue;
        const double nd = d + res_ * (k < 4 ? 1.0 : std::numbers::sqrt2);
        if (nd < dist_[nid]) {
          dist_[nid] = nd;
          open.emplace(nd, nid);
        }
      }
    }
  }

  double operator()(const Vec2& p) const {
    const auto [i, j] = cell(p);
    return dist_[idx(i, j)];
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::pair<int, int> cell(const Vec2& p) const {
    const int i = std::clamp(static_cast<int>(std::lround((p.x() - b_.xmin) / res_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::lround((p.y() - b_.ymin) / res_)), 0, ny_ - 1);
    return {i, j};
  }
  int idx(int i, int j) const { return j * nx_ + i; }

  Bounds b_;
  double res_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> dist_;
};

struct SearchNode {
  Pose pose;
  double g = 0.0;
  double f = 0.0;
  int parent = -1;
  int gear = 0;          // +1 / -1, 0 for the start node
  double steer = 0.0;
  double gear_run = 0.0; // length of the current constant-gear stretch
  std::vector<Pose> trace;  // poses after the parent, ending at `pose`
};

}  // namespace detail

/// Collision-free pose sequence from start to goal, spaced at most
/// `path_resolution` apart. Throws InvalidScenario when the start collides and
/// NoPathFound when the goal collides or the search is exhausted.
inline std::vector<Pose> hybrid_astar(const Scenario& sc, const SearchConfig& cfg = {}) {
  sc.validate();
  const auto obstacles = sc.collision_set();
  if (!collision_free_pose(sc.start, sc.vehicle, obstacles)) {
    throw Error(ErrorCode::InvalidScenario, "start pose collides");
  }
  if (!collision_free_pose(sc.goal, sc.vehicle, obstacles)) {
    throw Error(ErrorCode::NoPathFound, "goal pose collides");
  }
  if ((sc.start.position() - sc.goal.position()).norm() < 1e-9 &&
      std::abs(wrap_angle(sc.start.phi - sc.goal.phi)) < 1e-9) {
    return {sc.start};
  }

  const VehicleGeom inflated = sc.vehicle.inflated(cfg.inflation);
  auto free = [&](const Pose& p) { return collision_free_pose(p, inflated, obstacles); };
  // 0 at or beyond the soft margin, 1 when touching.
  auto crowding = [&](const Pose& p) {
    if (cfg.clearance <= 0.0 || cfg.clearance_weight <= 0.0) return 0.0;
    const ConvexPolygon fp = footprint(p, sc.vehicle);
    double d = cfg.clearance;
    for (const auto& o : obstacles) {
      if (!fp.box().overlaps(o.box(), cfg.clearance)) continue;
      d = std::min(d, detail::polygon_distance(fp, o));
    }
    return 1.0 - d / cfg.clearance;
  };
  const double radius = cfg.min_turn_radius(sc.vehicle.wheelbase);
  const detail::HolonomicHeuristic h2d(sc, obstacles, cfg.xy_resolution,
                                       0.45 * sc.vehicle.width);

  auto heuristic = [&](const Pose& p) {
    const double hrs = rs::shortest_length(p, sc.goal, radius);
    const double hh = h2d(p.position());
    return std::max(std::isfinite(hrs) ? hrs : 0.0, hh);
  };

  auto key = [&](const Pose& p) {
    const auto ix = static_cast<std::int64_t>(std::floor((p.x - sc.bounds.xmin) / cfg.xy_resolution));
    const auto iy = static_cast<std::int64_t>(std::floor((p.y - sc.bounds.ymin) / cfg.xy_resolution));
    const double a = wrap_angle(p.phi) + std::numbers::pi;
    auto it = static_cast<std::int64_t>(std::floor(a / (2.0 * std::numbers::pi) * cfg.heading_bins));
    it = std::clamp<std::int64_t>(it, 0, cfg.heading_bins - 1);
    return (ix * 100000 + iy) * 1000 + it;
  };

  std::vector<detail::SearchNode> nodes;
  nodes.reserve(4096);
  nodes.push_back({sc.start, 0.0, heuristic(sc.start), -1, 0, 0.0, 0.0, {}});

  using Entry = std::tuple<double, std::int64_t, int>;  // f, insertion order, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::int64_t order = 0;
  open.emplace(nodes[0].f, order++, 0);
  std::unordered_map<std::int64_t, double> best_g;
  std::unordered_map<std::int64_t, char> closed;
  best_g[key(sc.start)] = 0.0;

  std::vector<double> steers;
  const int half = std::max(cfg.steer_samples / 2, 1);
  for (int k = -half; k <= half; ++k) steers.push_back(cfg.max_steer * k / half);

  auto gear_runs_ok = [&](const rs::Path& path, int arriving_gear, double arriving_run) {
    int gear = arriving_gear;
    double run = arriving_run;
    for (const auto& s : path.segments) {
      const int g = s.length > 0.0 ? 1 : -1;
      if (gear != 0 && g != gear) {
        if (run < cfg.min_gear_run) return false;
        run = 0.0;
      }
      gear = g;
      run += std::abs(s.length);
    }
    return run >= cfg.min_gear_run;
  };

  auto rs_cost = [&](const rs::Path& path, int arriving_gear) {
    double c = 0.0;
    int gear = arriving_gear;
    for (const auto& s : path.segments) {
      const int g = s.length > 0.0 ? 1 : -1;
      c += std::abs(s.length) * (g < 0 ? cfg.reverse_penalty : 1.0);
      if (s.steer != rs::Steer::Straight) c += cfg.steer_penalty * std::abs(s.length);
      if (gear != 0 && g != gear) c += cfg.gear_switch_penalty;
      gear = g;
    }
    return c;
  };

  auto sample_rs = [&](const Pose& from, const rs::Path& path) {
    std::vector<Pose> out;
    Pose p = from;
    for (const auto& s : path.segments) {
      const int n = std::max(1, static_cast<int>(std::ceil(std::abs(s.length) / cfg.path_resolution)));
      for (int k = 1; k <= n; ++k) out.push_back(rs::advance(p, s.steer, s.length * k / n, radius));
      p = out.back();
    }
    if (!out.empty()) out.back().phi = sc.goal.phi;
    return out;
  };

  auto assemble = [&](int last, const std::vector<Pose>& tail) {
    std::vector<int> chain;
    for (int i = last; i >= 0; i = nodes[i].parent) chain.push_back(i);
    std::vector<Pose> out{sc.start};
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      for (const auto& p : nodes[*it].trace) out.push_back(p);
    }
    out.insert(out.end(), tail.begin(), tail.end());
    out.back() = sc.goal;
    return out;
  };

  int expansions = 0;
  while (!open.empty()) {
    const auto [f, ord, id] = open.top();
    open.pop();
    const auto k = key(nodes[id].pose);
    if (closed.count(k)) continue;
    closed[k] = 1;
    if (++expansions > cfg.max_expansions) break;

    const detail::SearchNode cur = nodes[id];

    if (expansions % std::max(cfg.analytic_every, 1) == 1 || cfg.analytic_every <= 1) {
      auto cands = rs::candidates(cur.pose, sc.goal, radius);
      std::stable_sort(cands.begin(), cands.end(), [&](const rs::Path& a, const rs::Path& b) {
        return rs_cost(a, cur.gear) < rs_cost(b, cur.gear);
      });
      int tried = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      std::vector<Pose> best_tail;
      for (const auto& c : cands) {
        if (tried >= cfg.analytic_candidates) break;
        if (!gear_runs_ok(c, cur.gear, cur.gear_run)) continue;
        ++tried;
        auto tail = sample_rs(cur.pose, c);
        if (!std::all_of(tail.begin(), tail.end(), free)) continue;
        double cost = rs_cost(c, cur.gear);
        const double step = c.length() / static_cast<double>(tail.size());
        for (const auto& p : tail) cost += cfg.clearance_weight * step * crowding(p);
        if (cost < best_cost) {
          best_cost = cost;
          best_tail = std::move(tail);
        }
      }
      if (!best_tail.empty()) return assemble(id, best_tail);
    }

    for (int gear : {1, -1}) {
      if (cur.gear != 0 && gear != cur.gear && cur.gear_run < cfg.min_gear_run) continue;
      for (double steer : steers) {
        const int n = std::max(1, static_cast<int>(std::ceil(cfg.primitive_length / cfg.path_resolution)));
        const double step = gear * cfg.primitive_length / n;
        const rs::Steer dir = steer == 0.0 ? rs::Steer::Straight
                                           : (steer > 0.0 ? rs::Steer::Left : rs::Steer::Right);
        const double r = steer == 0.0 ? 1.0 : sc.vehicle.wheelbase / std::tan(std::abs(steer));
        detail::SearchNode next;
        next.trace.reserve(n);
        Pose p = cur.pose;
        bool ok = true;
        double crowd = 0.0;
        for (int s = 0; s < n; ++s) {
          p = rs::advance(p, dir, step, r);
          if (!sc.bounds.contains(p.position()) || !free(p)) {
            ok = false;
            break;
          }
          crowd += crowding(p);
          next.trace.push_back(p);
        }
        if (!ok) continue;
        const auto nk = key(p);
        if (closed.count(nk)) continue;

        double cost = cfg.primitive_length * (gear < 0 ? cfg.reverse_penalty : 1.0);
        cost += cfg.steer_penalty * cfg.primitive_length * std::abs(steer) / cfg.max_steer;
        cost += cfg.steer_change_penalty * std::abs(steer - cur.steer) / cfg.max_steer;
        if (cur.gear != 0 && gear != cur.gear) cost += cfg.gear_switch_penalty;
        cost += cfg.clearance_weight * cfg.primitive_length * crowd / n;
        const double g = cur.g + cost;
        auto bit = best_g.find(nk);
        if (bit != best_g.end() && bit->second <= g) continue;
        best_g[nk] = g;

        next.pose = p;
        next.g = g;
        next.f = g + heuristic(p);
        next.parent = id;
        next.gear = gear;
        next.steer = steer;
        next.gear_run = (gear == cur.gear ? cur.gear_run : 0.0) + cfg.primitive_length;
        nodes.push_back(std::move(next));
        open.emplace(nodes.back().f, order++, static_cast<int>(nodes.size()) - 1);
      }
    }
  }
  throw Error(ErrorCode::NoPathFound,
              "search exhausted after " + std::to_string(expansions) + " expansions");
}

}  // namespace ritp
