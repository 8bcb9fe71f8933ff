#pragma once

// Open-loop rollout of a planned trajectory through the kinematic model, with
// optional uniform noise on the commands and on the position measurement.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/geometry.hpp"
#include "ritp/pipeline.hpp"

namespace ritp {

struct DisturbanceSpec {
  double v_amp = 0.0;      // m/s
  double delta_amp = 0.0;  // rad
  double pos_amp = 0.01;   // m, measurement only
  std::uint64_t seed = 0;
};

/// Command-noise pairs (v_amp, delta_amp) in increasing severity.
inline constexpr std::pair<double, double> kDisturbanceLevels[] = {
    {0.2, 0.05}, {0.3, 0.08}, {0.4, 0.12}, {0.6, 0.17}, {0.8, 0.26}, {1.0, 0.34}};

/// Named presets: none, low, medium, high.
inline DisturbanceSpec disturbance_preset(const std::string& level, std::uint64_t seed = 0) {
  DisturbanceSpec d;
  d.seed = seed;
  if (level == "none") {
    d.pos_amp = 0.0;
  } else if (level == "low") {
    std::tie(d.v_amp, d.delta_amp) = kDisturbanceLevels[0];
  } else if (level == "medium") {
    std::tie(d.v_amp, d.delta_amp) = kDisturbanceLevels[2];
  } else if (level == "high") {
    std::tie(d.v_amp, d.delta_amp) = kDisturbanceLevels[5];
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown disturbance level '" + level + "'");
  }
  return d;
}

struct RolloutResult {
  std::vector<Pose> poses;     // rolled-out rear-axle poses, one per trajectory sample
  std::vector<double> errors;  // measured distance to the planned position
  double max_error = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
};

namespace detail {

/// Cubic Lagrange interpolation of v through the four samples around step k.
inline double lagrange_v(const std::vector<TrajectorySample>& s, std::size_t k, double t) {
  const std::size_t n = s.size();
  if (n < 4) {
    const double u = (t - s[k].t) / (s[k + 1].t - s[k].t);
    return (1 - u) * s[k].v + u * s[k + 1].v;
  }
  std::size_t lo = k == 0 ? 0 : k - 1;
  if (lo + 3 >= n) lo = n - 4;
  double out = 0.0;
  for (std::size_t i = lo; i < lo + 4; ++i) {
    double w = 1.0;
    for (std::size_t j = lo; j < lo + 4; ++j) {
      if (j != i) w *= (t - s[j].t) / (s[i].t - s[j].t);
    }
    out += w * s[i].v;
  }
  return out;
}

}  // namespace detail

/// RK4 integration of (x, y, phi) at the trajectory's own step. Steering
/// follows the planned samples (cubic Hermite with omega as slope); speed is
/// a cubic through neighbouring samples. One noise draw per step. At interior
/// samples where the plan stands still the heading is taken from the plan,
/// since the vehicle can turn its wheels but not its body there.
inline RolloutResult rollout(const Trajectory& traj, const VehicleGeom& geom, const DisturbanceSpec& dist) {
  if (!(dist.v_amp >= 0 && dist.delta_amp >= 0 && dist.pos_amp >= 0)) {
    throw Error(ErrorCode::InvalidInput, "disturbance amplitudes must be >= 0");
  }
  const auto& s = traj.samples;
  RolloutResult r;
  if (s.empty()) return r;
  std::mt19937_64 rng(dist.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double L = geom.wheelbase;

  double x = s[0].x, y = s[0].y, phi = s[0].phi;
  r.poses.push_back({x, y, phi});
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double h = s[k + 1].t - s[k].t;
    const double nv = dist.v_amp > 0 ? dist.v_amp * unit(rng) : 0.0;
    const double nd = dist.delta_amp > 0 ? dist.delta_amp * unit(rng) : 0.0;
    if (k > 0 && s[k].v == 0.0) phi = s[k].phi;
    auto deriv = [&](double u, double ph, double& dx, double& dy, double& dph) {
      const double v = detail::lagrange_v(s, k, s[k].t + u * h) + nv;
      const double de = detail::hermite(s[k].delta, s[k].omega, s[k + 1].delta, s[k + 1].omega, h, u) + nd;
      dx = v * std::cos(ph);
      dy = v * std::sin(ph);
      dph = v * std::tan(de) / L;
    };
    double ax, ay, ap, bx, by, bp, cx, cy, cp, ex, ey, ep;
    deriv(0.0, phi, ax, ay, ap);
    deriv(0.5, phi + 0.5 * h * ap, bx, by, bp);
    deriv(0.5, phi + 0.5 * h * bp, cx, cy, cp);
    deriv(1.0, phi + h * cp, ex, ey, ep);
    x += h / 6.0 * (ax + 2 * bx + 2 * cx + ex);
    y += h / 6.0 * (ay + 2 * by + 2 * cy + ey);
    phi += h / 6.0 * (ap + 2 * bp + 2 * cp + ep);
    r.poses.push_back({x, y, wrap_angle(phi)});
  }

  r.errors.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    Vec2 measured = r.poses[k].position();
    if (dist.pos_amp > 0) measured += dist.pos_amp * Vec2(unit(rng), unit(rng));
    r.errors.push_back((measured - Vec2(s[k].x, s[k].y)).norm());
  }
  const double n = static_cast<double>(r.errors.size());
  r.mean_error = std::accumulate(r.errors.begin(), r.errors.end(), 0.0) / n;
  double var = 0.0;
  for (double e : r.errors) {
    r.max_error = std::max(r.max_error, e);
    var += (e - r.mean_error) * (e - r.mean_error);
  }
  r.std_error = std::sqrt(var / n);
  return r;
}

/// Wheel speeds of a differential-drive platform emulating the bicycle model.
inline std::pair<double, double> differential_speeds(double v, double delta, double L, double w) {
  if (!(L > 0.0) || !(w > 0.0)) throw Error(ErrorCode::InvalidInput, "L and w must be > 0");
  if (!(std::abs(delta) < M_PI / 2)) throw Error(ErrorCode::InvalidInput, "|delta| must be < pi/2");
  const double k = w * std::tan(delta) / (2.0 * L);
  return {v * (1.0 - k), v * (1.0 + k)};
}

inline bool rollout_collides(std::span<const Pose> poses, const VehicleGeom& geom,
                             std::span<const ConvexPolygon> obstacles) {
  for (const auto& p : poses) {
    if (!collision_free_pose(p, geom, obstacles)) return true;
  }
  return false;
}

/// Fraction of rollouts whose footprint touches an obstacle at any sample.
inline double collision_rate(std::span<const std::vector<Pose>> rollouts, const VehicleGeom& geom,
                             std::span<const ConvexPolygon> obstacles) {
  if (rollouts.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : rollouts) hits += rollout_collides(r, geom, obstacles) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rollouts.size());
}

}  // namespace ritp
