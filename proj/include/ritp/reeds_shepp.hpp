#pragma once

// Reeds-Shepp shortest-path families (CSC, CCC, CCCC, CCSC, CCSCC) for a car
// with minimum turning radius. Used by the hybrid A* search for analytic goal
// connection. Formulas follow the usual normalized derivation (unit radius,
// start at origin); every candidate is verified by forward integration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ritp/geometry.hpp"

namespace ritp::rs {

enum class Steer { Left, Straight, Right };

struct Segment {
  Steer steer;
  double length;  // meters, negative means reverse
};

struct Path {
  std::vector<Segment> segments;

  double length() const {
    double l = 0.0;
    for (const auto& s : segments) l += std::abs(s.length);
    return l;
  }
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kZero = 10.0 * std::numeric_limits<double>::epsilon();

inline double mod2pi(double x) {
  double v = std::fmod(x, 2.0 * kPi);
  if (v < -kPi) {
    v += 2.0 * kPi;
  } else if (v > kPi) {
    v -= 2.0 * kPi;
  }
  return v;
}

inline void polar(double x, double y, double& r, double& theta) {
  r = std::sqrt(x * x + y * y);
  theta = std::atan2(y, x);
}

inline void tau_omega(double u, double v, double xi, double eta, double phi, double& tau,
                      double& omega) {
  const double delta = mod2pi(u - v);
  const double a = std::sin(u) - std::sin(delta);
  const double b = std::cos(u) - std::cos(delta) - 1.0;
  const double t1 = std::atan2(eta * a - xi * b, xi * a + eta * b);
  const double t2 = 2.0 * (std::cos(delta) - std::cos(v) - std::cos(u)) + 3.0;
  tau = (t2 < 0.0) ? mod2pi(t1 + kPi) : mod2pi(t1);
  omega = mod2pi(tau - u + v - phi);
}

inline bool lp_sp_lp(double x, double y, double phi, double& t, double& u, double& v) {
  polar(x - std::sin(phi), y - 1.0 + std::cos(phi), u, t);
  if (t >= -kZero) {
    v = mod2pi(phi - t);
    if (v >= -kZero) return true;
  }
  return false;
}

inline bool lp_sp_rp(double x, double y, double phi, double& t, double& u, double& v) {
  double t1 = 0.0;
  double u1 = 0.0;
  polar(x + std::sin(phi), y - 1.0 - std::cos(phi), u1, t1);
  u1 = u1 * u1;
  if (u1 >= 4.0) {
    u = std::sqrt(u1 - 4.0);
    const double theta = std::atan2(2.0, u);
    t = mod2pi(t1 + theta);
    v = mod2pi(t - phi);
    return t >= -kZero && v >= -kZero;
  }
  return false;
}

inline bool lp_rm_l(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi);
  const double eta = y - 1.0 + std::cos(phi);
  double u1 = 0.0;
  double theta = 0.0;
  polar(xi, eta, u1, theta);
  if (u1 <= 4.0) {
    u = -2.0 * std::asin(0.25 * u1);
    t = mod2pi(theta + 0.5 * u + kPi);
    v = mod2pi(phi - t + u);
    return t >= -kZero && u <= kZero;
  }
  return false;
}

inline bool lp_rup_lum_rm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  const double rho = 0.25 * (2.0 + std::sqrt(xi * xi + eta * eta));
  if (rho <= 1.0) {
    u = std::acos(rho);
    tau_omega(u, -u, xi, eta, phi, t, v);
    return t >= -kZero && v <= kZero;
  }
  return false;
}

inline bool lp_rum_lum_rp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  const double rho = (20.0 - xi * xi - eta * eta) / 16.0;
  if (rho >= 0.0 && rho <= 1.0) {
    u = -std::acos(rho);
    if (u >= -0.5 * kPi) {
      tau_omega(u, u, xi, eta, phi, t, v);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

inline bool lp_rm_sm_lm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi);
  const double eta = y - 1.0 + std::cos(phi);
  double rho = 0.0;
  double theta = 0.0;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    const double r = std::sqrt(rho * rho - 4.0);
    u = 2.0 - r;
    t = mod2pi(theta + std::atan2(r, -2.0));
    v = mod2pi(phi - 0.5 * kPi - t);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

inline bool lp_rm_sm_rm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  double rho = 0.0;
  double theta = 0.0;
  polar(-eta, xi, rho, theta);
  if (rho >= 2.0) {
    t = theta;
    u = 2.0 - rho;
    v = mod2pi(t + 0.5 * kPi - phi);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

inline bool lp_rm_s_lm_rp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi);
  const double eta = y - 1.0 - std::cos(phi);
  double rho = 0.0;
  double theta = 0.0;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    u = 4.0 - std::sqrt(rho * rho - 4.0);
    if (u <= kZero) {
      t = mod2pi(std::atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta));
      v = mod2pi(t - phi);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

// Normalized word: steering letters plus signed unit-radius lengths.
struct Word {
  std::vector<Steer> steer;
  std::vector<double> len;
};

inline constexpr Steer kL = Steer::Left;
inline constexpr Steer kR = Steer::Right;
inline constexpr Steer kS = Steer::Straight;

inline std::vector<Word> all_words(double x, double y, double phi) {
  std::vector<Word> out;
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
  const double h = 0.5 * kPi;
  auto add = [&](std::vector<Steer> s, std::vector<double> l) { out.push_back({std::move(s), std::move(l)}); };

  // CSC
  if (lp_sp_lp(x, y, phi, t, u, v)) add({kL, kS, kL}, {t, u, v});
  if (lp_sp_lp(-x, y, -phi, t, u, v)) add({kL, kS, kL}, {-t, -u, -v});
  if (lp_sp_lp(x, -y, -phi, t, u, v)) add({kR, kS, kR}, {t, u, v});
  if (lp_sp_lp(-x, -y, phi, t, u, v)) add({kR, kS, kR}, {-t, -u, -v});
  if (lp_sp_rp(x, y, phi, t, u, v)) add({kL, kS, kR}, {t, u, v});
  if (lp_sp_rp(-x, y, -phi, t, u, v)) add({kL, kS, kR}, {-t, -u, -v});
  if (lp_sp_rp(x, -y, -phi, t, u, v)) add({kR, kS, kL}, {t, u, v});
  if (lp_sp_rp(-x, -y, phi, t, u, v)) add({kR, kS, kL}, {-t, -u, -v});

  // CCC
  if (lp_rm_l(x, y, phi, t, u, v)) add({kL, kR, kL}, {t, u, v});
  if (lp_rm_l(-x, y, -phi, t, u, v)) add({kL, kR, kL}, {-t, -u, -v});
  if (lp_rm_l(x, -y, -phi, t, u, v)) add({kR, kL, kR}, {t, u, v});
  if (lp_rm_l(-x, -y, phi, t, u, v)) add({kR, kL, kR}, {-t, -u, -v});
  const double xb = x * std::cos(phi) + y * std::sin(phi);
  const double yb = x * std::sin(phi) - y * std::cos(phi);
  if (lp_rm_l(xb, yb, phi, t, u, v)) add({kL, kR, kL}, {v, u, t});
  if (lp_rm_l(-xb, yb, -phi, t, u, v)) add({kL, kR, kL}, {-v, -u, -t});
  if (lp_rm_l(xb, -yb, -phi, t, u, v)) add({kR, kL, kR}, {v, u, t});
  if (lp_rm_l(-xb, -yb, phi, t, u, v)) add({kR, kL, kR}, {-v, -u, -t});

  // CCCC
  if (lp_rup_lum_rm(x, y, phi, t, u, v)) add({kL, kR, kL, kR}, {t, u, -u, v});
  if (lp_rup_lum_rm(-x, y, -phi, t, u, v)) add({kL, kR, kL, kR}, {-t, -u, u, -v});
  if (lp_rup_lum_rm(x, -y, -phi, t, u, v)) add({kR, kL, kR, kL}, {t, u, -u, v});
  if (lp_rup_lum_rm(-x, -y, phi, t, u, v)) add({kR, kL, kR, kL}, {-t, -u, u, -v});
  if (lp_rum_lum_rp(x, y, phi, t, u, v)) add({kL, kR, kL, kR}, {t, u, u, v});
  if (lp_rum_lum_rp(-x, y, -phi, t, u, v)) add({kL, kR, kL, kR}, {-t, -u, -u, -v});
  if (lp_rum_lum_rp(x, -y, -phi, t, u, v)) add({kR, kL, kR, kL}, {t, u, u, v});
  if (lp_rum_lum_rp(-x, -y, phi, t, u, v)) add({kR, kL, kR, kL}, {-t, -u, -u, -v});

  // CCSC
  if (lp_rm_sm_lm(x, y, phi, t, u, v)) add({kL, kR, kS, kL}, {t, -h, u, v});
  if (lp_rm_sm_lm(-x, y, -phi, t, u, v)) add({kL, kR, kS, kL}, {-t, h, -u, -v});
  if (lp_rm_sm_lm(x, -y, -phi, t, u, v)) add({kR, kL, kS, kR}, {t, -h, u, v});
  if (lp_rm_sm_lm(-x, -y, phi, t, u, v)) add({kR, kL, kS, kR}, {-t, h, -u, -v});
  if (lp_rm_sm_rm(x, y, phi, t, u, v)) add({kL, kR, kS, kR}, {t, -h, u, v});
  if (lp_rm_sm_rm(-x, y, -phi, t, u, v)) add({kL, kR, kS, kR}, {-t, h, -u, -v});
  if (lp_rm_sm_rm(x, -y, -phi, t, u, v)) add({kR, kL, kS, kL}, {t, -h, u, v});
  if (lp_rm_sm_rm(-x, -y, phi, t, u, v)) add({kR, kL, kS, kL}, {-t, h, -u, -v});
  // CSCC (time-reversed CCSC)
  if (lp_rm_sm_lm(xb, yb, phi, t, u, v)) add({kL, kS, kR, kL}, {v, u, -h, t});
  if (lp_rm_sm_lm(-xb, yb, -phi, t, u, v)) add({kL, kS, kR, kL}, {-v, -u, h, -t});
  if (lp_rm_sm_lm(xb, -yb, -phi, t, u, v)) add({kR, kS, kL, kR}, {v, u, -h, t});
  if (lp_rm_sm_lm(-xb, -yb, phi, t, u, v)) add({kR, kS, kL, kR}, {-v, -u, h, -t});
  if (lp_rm_sm_rm(xb, yb, phi, t, u, v)) add({kR, kS, kR, kL}, {v, u, -h, t});
  if (lp_rm_sm_rm(-xb, yb, -phi, t, u, v)) add({kR, kS, kR, kL}, {-v, -u, h, -t});
  if (lp_rm_sm_rm(xb, -yb, -phi, t, u, v)) add({kL, kS, kL, kR}, {v, u, -h, t});
  if (lp_rm_sm_rm(-xb, -yb, phi, t, u, v)) add({kL, kS, kL, kR}, {-v, -u, h, -t});

  // CCSCC
  if (lp_rm_s_lm_rp(x, y, phi, t, u, v)) add({kL, kR, kS, kL, kR}, {t, -h, u, -h, v});
  if (lp_rm_s_lm_rp(-x, y, -phi, t, u, v)) add({kL, kR, kS, kL, kR}, {-t, h, -u, h, -v});
  if (lp_rm_s_lm_rp(x, -y, -phi, t, u, v)) add({kR, kL, kS, kR, kL}, {t, -h, u, -h, v});
  if (lp_rm_s_lm_rp(-x, -y, phi, t, u, v)) add({kR, kL, kS, kR, kL}, {-t, h, -u, h, -v});
  return out;
}

}  // namespace detail

/// Advances `pose` along one segment by signed arc length `dist`.
inline Pose advance(const Pose& pose, Steer steer, double dist, double radius) {
  Pose p = pose;
  if (steer == Steer::Straight) {
    p.x += dist * std::cos(pose.phi);
    p.y += dist * std::sin(pose.phi);
    return p;
  }
  const double turn = dist / radius * (steer == Steer::Left ? 1.0 : -1.0);
  const double side = steer == Steer::Left ? 1.0 : -1.0;
  // Turning center sits one radius to the side of the heading.
  const double cx = pose.x - side * radius * std::sin(pose.phi);
  const double cy = pose.y + side * radius * std::cos(pose.phi);
  p.phi = pose.phi + turn;
  p.x = cx + side * radius * std::sin(p.phi);
  p.y = cy - side * radius * std::cos(p.phi);
  return p;
}

inline Pose endpoint(const Pose& start, const Path& path, double radius) {
  Pose p = start;
  for (const auto& s : path.segments) p = advance(p, s.steer, s.length, radius);
  return p;
}

/// All Reeds-Shepp words connecting `start` to `goal`, sorted by length,
/// each verified to land on the goal within 1e-6.
inline std::vector<Path> candidates(const Pose& start, const Pose& goal, double radius) {
  const double dx = goal.x - start.x;
  const double dy = goal.y - start.y;
  const double c = std::cos(start.phi);
  const double s = std::sin(start.phi);
  const double x = (c * dx + s * dy) / radius;
  const double y = (-s * dx + c * dy) / radius;
  const double phi = detail::mod2pi(goal.phi - start.phi);

  std::vector<Path> out;
  for (const auto& w : detail::all_words(x, y, phi)) {
    Path p;
    for (std::size_t i = 0; i < w.steer.size(); ++i) {
      const double len = w.len[i] * radius;
      if (std::abs(len) < 1e-10) continue;
      p.segments.push_back({w.steer[i], len});
    }
    const Pose end = endpoint(start, p, radius);
    if (std::hypot(end.x - goal.x, end.y - goal.y) > 1e-6 ||
        std::abs(wrap_angle(end.phi - goal.phi)) > 1e-6) {
      continue;
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const Path& a, const Path& b) { return a.length() < b.length(); });
  return out;
}

inline double shortest_length(const Pose& start, const Pose& goal, double radius) {
  const auto c = candidates(start, goal, radius);
  return c.empty() ? std::numeric_limits<double>::infinity() : c.front().length();
}

}  // namespace ritp::rs
