#pragma once

// Search, split at gear shifts, plan each segment (path then speed) on a
// worker pool, recover states through the flat output and join.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>
#include <tuple>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/flatness.hpp"
#include "ritp/hybrid_astar.hpp"
#include "ritp/itca.hpp"
#include "ritp/refpath.hpp"
#include "ritp/scenario.hpp"
#include "ritp/velplan.hpp"

namespace ritp {

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double delta = 0.0;
  double v = 0.0;
  double omega = 0.0;

  Pose pose() const { return {x, y, phi}; }
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<std::size_t> segment_boundaries;  // sample index of every gear shift

  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
};

struct PlannerConfig {
  SearchConfig search;
  ItcaConfig itca;
  VelocityConfig velocity;
  double output_dt = 0.02;
  int workers = 4;
  double min_segment_length = 0.2;
  bool check_output_samples = true;  // feed collisions of the timed samples back into ItCA
};

struct SegmentPlan {
  PiecewisePath reference;
  ItcaResult path;
  SpeedProfile speed;
  double v_limit = 0.0;  // limits handed to the speed planner, in path units
  double a_limit = 0.0;
  Trajectory trajectory;
  double path_seconds = 0.0;
  double speed_seconds = 0.0;
};

struct StageTimes {
  double search = 0.0;
  double segments = 0.0;
  double join = 0.0;
  double total = 0.0;
};

struct PlanResult {
  Trajectory trajectory;
  std::vector<Pose> reference;
  std::vector<SegmentPlan> segments;
  StageTimes times;
};

/// Flat output xi(t) = f(s(t)) with time derivatives by the chain rule.
inline FlatPoint compose(const PolyPath& pp, const SpeedProfile& sp, double t) {
  const double s = std::clamp(sp.s(t), 0.0, pp.s_end);
  const double s1 = sp.s(t, 1), s2 = sp.s(t, 2), s3 = sp.s(t, 3);
  const Vec2 f1 = pp.eval(s, 1), f2 = pp.eval(s, 2), f3 = pp.eval(s, 3);
  FlatPoint fp;
  fp.xi = pp.eval(s);
  fp.d1 = f1 * s1;
  fp.d2 = f2 * s1 * s1 + f1 * s2;
  fp.d3 = f3 * s1 * s1 * s1 + 3.0 * f2 * s1 * s2 + f1 * s3;
  return fp;
}

/// Heading and steering at s from the path geometry alone (the limits used
/// where the vehicle stands still).
inline VehicleState standstill_state(const PolyPath& pp, double s, int zeta, double L) {
  const Vec2 f1 = pp.eval(s, 1), f2 = pp.eval(s, 2);
  const double n = f1.norm();
  VehicleState st;
  const Vec2 p = pp.eval(s);
  st.pose = {p.x(), p.y(), std::atan2(zeta * f1.y(), zeta * f1.x())};
  st.delta = n > 0.0 ? std::atan(L * cross2(f1, f2) / (zeta * n * n * n)) : 0.0;
  return st;
}

/// Uniformly timed samples of one segment; sp.t_max must be a multiple of dt.
inline Trajectory segment_trajectory(const PolyPath& pp, const SpeedProfile& sp, double L, double dt) {
  Trajectory tr;
  const int n = std::max(1, static_cast<int>(std::lround(sp.t_max / dt)));
  tr.samples.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = k == n ? sp.t_max : k * dt;
    const FlatPoint fp = compose(pp, sp, t);
    VehicleState st;
    if (fp.d1.norm() >= kSingularSpeed) {
      st = state_from_flat(fp, L, sp.zeta);
    } else {
      st = standstill_state(pp, std::clamp(sp.s(t), 0.0, pp.s_end), sp.zeta, L);
    }
    tr.samples.push_back({t, fp.xi.x(), fp.xi.y(), st.pose.phi, st.delta, st.v, st.omega});
  }
  return tr;
}

/// Concatenates rest-to-rest pieces. The shared boundary sample is kept once,
/// with the values of the departing piece.
inline Trajectory join(const std::vector<Trajectory>& parts, double tol = 1e-6) {
  Trajectory out;
  double offset = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.samples.empty()) continue;
    if (!out.samples.empty()) {
      const auto& a = out.samples.back();
      const auto& b = p.samples.front();
      const double gap = std::hypot(a.x - b.x, a.y - b.y);
      if (gap > tol) {
        throw Error(ErrorCode::BoundaryMismatch,
                    "pieces " + std::to_string(i - 1) + " and " + std::to_string(i) + " are " +
                        std::to_string(gap) + " m apart");
      }
      offset = a.t - b.t;
      out.samples.pop_back();
      out.segment_boundaries.push_back(out.samples.size());
    } else {
      offset = -p.samples.front().t;
    }
    for (auto s : p.samples) {
      s.t += offset;
      out.samples.push_back(s);
    }
  }
  return out;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Speed limits in path units: |v| = |f'| ds/dt and
/// dv/dt = |f'| d2s/dt2 + (d|f'|/ds) (ds/dt)^2.
inline std::pair<double, double> path_limits(const PolyPath& pp, double v_max, double a_max) {
  double g = 0.0, h = 0.0;
  const int n = std::max(pp.m_s, 50);
  for (int j = 0; j < n; ++j) {
    const double s = pp.s_end * j / (n - 1);
    const Vec2 f1 = pp.eval(s, 1), f2 = pp.eval(s, 2);
    const double nf = f1.norm();
    g = std::max(g, nf);
    if (nf > 0.0) h = std::max(h, std::abs(f1.dot(f2)) / nf);
  }
  g = std::max(g, 1e-9);
  double v_lim = v_max / g;
  if (h > 0.0) v_lim = std::min(v_lim, std::sqrt(0.1 * a_max / h));
  return {v_lim, 0.9 * a_max / g};
}

inline SegmentPlan plan_one(const PiecewisePath& ref, const Scenario& sc,
                            const std::vector<ConvexPolygon>& obstacles, const PlannerConfig& cfg,
                            const std::atomic<bool>* cancel) {
  SegmentPlan out;
  out.reference = ref;
  VelocityConfig vcfg = cfg.velocity;
  vcfg.samples_per_meter = cfg.itca.samples_per_meter;
  vcfg.time_quantum = cfg.output_dt;

  std::optional<SegmentPlan> timed;  // speed and samples of the latest candidate
  double speed_seconds = 0.0;
  auto time_path = [&](const PolyPath& pp) {
    const auto t0 = Clock::now();
    SegmentPlan sp;
    std::tie(sp.v_limit, sp.a_limit) = path_limits(pp, sc.v_max, sc.a_max);
    sp.speed = plan_velocity(pp.s_end, sp.v_limit, sp.a_limit, ref.zeta, vcfg);
    sp.trajectory = segment_trajectory(pp, sp.speed, sc.vehicle.wheelbase, cfg.output_dt);
    speed_seconds += seconds_since(t0);
    timed = std::move(sp);
  };

  PathCheck check;
  if (cfg.check_output_samples) {
    check = [&](const PolyPath& pp) -> std::optional<Vec2> {
      time_path(pp);
      for (const auto& s : timed->trajectory.samples) {
        if (!collision_free_pose(s.pose(), sc.vehicle, obstacles)) return Vec2(s.x, s.y);
      }
      return std::nullopt;
    };
  }

  const auto t0 = Clock::now();
  out.path = plan_segment(ref, obstacles, sc.vehicle, cfg.itca, check, cancel);
  if (!cfg.check_output_samples) time_path(out.path.path);
  out.path_seconds = seconds_since(t0) - speed_seconds;
  out.speed_seconds = speed_seconds;
  out.speed = std::move(timed->speed);
  out.v_limit = timed->v_limit;
  out.a_limit = timed->a_limit;
  out.trajectory = std::move(timed->trajectory);
  return out;
}

}  // namespace detail

/// Full planner. Failures surface as PlanningFailed carrying the cause and
/// the lowest failing segment index (-1 before segmentation).
inline PlanResult plan(const Scenario& sc, const PlannerConfig& cfg = {}) {
  cfg.itca.validate();
  if (!(cfg.output_dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "output_dt must be > 0");
  const auto t_start = detail::Clock::now();
  PlanResult res;

  std::vector<PiecewisePath> refs;
  try {
    auto t0 = detail::Clock::now();
    res.reference = hybrid_astar(sc, cfg.search);
    res.times.search = detail::seconds_since(t0);
    if (res.reference.size() < 2) {
      // Already at the goal.
      const Pose& p = res.reference.front();
      res.trajectory.samples.push_back({0.0, p.x, p.y, p.phi, 0.0, 0.0, 0.0});
      res.times.total = detail::seconds_since(t_start);
      return res;
    }
    refs = split_at_gsp(res.reference, cfg.min_segment_length);
  } catch (const PlanningFailed&) {
    throw;
  } catch (const Error& e) {
    throw PlanningFailed(e.code(), -1, e.what());
  }

  const auto obstacles = sc.collision_set();
  const int nseg = static_cast<int>(refs.size());
  std::vector<std::optional<SegmentPlan>> done(nseg);
  std::vector<std::exception_ptr> errors(nseg);
  std::vector<std::atomic<bool>> cancel(nseg);
  std::atomic<int> next{0};
  std::atomic<int> first_failed{INT_MAX};

  auto worker = [&] {
    for (int i = next++; i < nseg; i = next++) {
      if (first_failed.load() < i) continue;
      try {
        done[i] = detail::plan_one(refs[i], sc, obstacles, cfg, &cancel[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        // Later segments are pointless now; earlier ones keep running so the
        // reported failure is always the lowest failing index.
        int seen = first_failed.load();
        while (i < seen && !first_failed.compare_exchange_weak(seen, i)) {
        }
        for (int j = i + 1; j < nseg; ++j) cancel[j] = true;
      }
    }
  };

  auto t0 = detail::Clock::now();
  const int nw = std::clamp(cfg.workers, 1, nseg);
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  res.times.segments = detail::seconds_since(t0);

  for (int i = 0; i < nseg; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw PlanningFailed(e.code(), i, e.what());
    }
  }

  t0 = detail::Clock::now();
  std::vector<Trajectory> parts;
  for (auto& d : done) {
    parts.push_back(d->trajectory);
    res.segments.push_back(std::move(*d));
  }
  try {
    res.trajectory = join(parts);
  } catch (const Error& e) {
    throw PlanningFailed(e.code(), -1, e.what());
  }
  res.times.join = detail::seconds_since(t0);
  res.times.total = detail::seconds_since(t_start);
  return res;
}

}  // namespace ritp
