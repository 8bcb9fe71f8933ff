#pragma once

// State and control recovery from the rear-axle flat output of the kinematic
// bicycle model
//
//   x' = v cos(phi),  y' = v sin(phi),  phi' = v tan(delta) / L,  delta' = omega.

#include <cmath>
#include <span>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/geometry.hpp"

namespace ritp {

inline constexpr double kSingularSpeed = 1e-6;

/// Flat output and its first three derivatives with respect to time.
struct FlatPoint {
  Vec2 xi = Vec2::Zero();
  Vec2 d1 = Vec2::Zero();
  Vec2 d2 = Vec2::Zero();
  Vec2 d3 = Vec2::Zero();
};

struct VehicleState {
  Pose pose;
  double delta = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

namespace detail {

inline void require_moving(const FlatPoint& fp, double eps) {
  if (!(fp.d1.norm() >= eps)) {
    throw Error(ErrorCode::SingularVelocity,
                "flat output speed " + std::to_string(fp.d1.norm()) + " below threshold");
  }
}

}  // namespace detail

/// Steering rate. For zeta = -1 the curvature term takes the sign of v.
inline double omega_from_flat(const FlatPoint& fp, double L, int zeta = 1, double eps = kSingularSpeed) {
  detail::require_moving(fp, eps);
  const double p1 = fp.d1.norm();
  const double n = cross2(fp.d1, fp.d2);
  const double ndot = cross2(fp.d1, fp.d3);
  const double p3 = p1 * p1 * p1;
  const double num = ndot * p3 * L - n * fp.d2.dot(fp.d1) * 3.0 * p1 * L;
  const double den = L * L * n * n + p3 * p3;
  return zeta * num / den;
}

inline VehicleState state_from_flat(const FlatPoint& fp, double L, int zeta = 1,
                                    double eps = kSingularSpeed) {
  detail::require_moving(fp, eps);
  const double p1 = fp.d1.norm();
  VehicleState st;
  st.pose = {fp.xi.x(), fp.xi.y(), std::atan2(zeta * fp.d1.y(), zeta * fp.d1.x())};
  st.v = zeta * p1;
  st.delta = std::atan(L * cross2(fp.d1, fp.d2) / (zeta * p1 * p1 * p1));
  st.omega = omega_from_flat(fp, L, zeta, eps);
  return st;
}

namespace detail {

inline double hermite(double p0, double m0, double p1, double m1, double h, double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * p1 +
         (u3 - u2) * h * m1;
}

}  // namespace detail

/// Integrates the kinematic model with RK4 from the recovered initial state,
/// driven by the recovered (v, omega), and returns the largest distance to
/// the flat-output positions. Between samples v and delta are cubic Hermite
/// interpolants (slopes dv/dt and omega). Standstill is allowed only at the
/// first and last sample; there heading and steering are carried over from the
/// neighbouring sample.
inline double rollout_consistency(std::span<const FlatPoint> pts, double dt, double L, int zeta = 1,
                                  double eps = kSingularSpeed) {
  const std::size_t n = pts.size();
  if (n < 2 || !(dt > 0.0)) throw Error(ErrorCode::InvalidInput, "need >= 2 samples and dt > 0");

  std::vector<VehicleState> st(n);
  std::vector<double> acc(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const bool endpoint = k == 0 || k + 1 == n;
    if (endpoint && pts[k].d1.norm() < eps) continue;
    st[k] = state_from_flat(pts[k], L, zeta, eps);
    acc[k] = zeta * pts[k].d1.dot(pts[k].d2) / pts[k].d1.norm();
  }
  for (std::size_t k : {std::size_t{0}, n - 1}) {
    if (pts[k].d1.norm() >= eps) continue;
    const std::size_t nb = k == 0 ? 1 : n - 2;
    if (pts[nb].d1.norm() < eps) throw Error(ErrorCode::SingularVelocity, "standstill next to endpoint");
    st[k] = st[nb];
    st[k].pose = {pts[k].xi.x(), pts[k].xi.y(), st[nb].pose.phi};
    st[k].v = 0.0;
    st[k].omega = 0.0;
  }

  double x = st[0].pose.x, y = st[0].pose.y, phi = st[0].pose.phi;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto& a = st[k];
    const auto& b = st[k + 1];
    auto rhs = [&](double u, double ph, double& dx, double& dy, double& dph) {
      const double v = detail::hermite(a.v, acc[k], b.v, acc[k + 1], dt, u);
      const double de = detail::hermite(a.delta, a.omega, b.delta, b.omega, dt, u);
      dx = v * std::cos(ph);
      dy = v * std::sin(ph);
      dph = v * std::tan(de) / L;
    };
    double k1x, k1y, k1p, k2x, k2y, k2p, k3x, k3y, k3p, k4x, k4y, k4p;
    rhs(0.0, phi, k1x, k1y, k1p);
    rhs(0.5, phi + 0.5 * dt * k1p, k2x, k2y, k2p);
    rhs(0.5, phi + 0.5 * dt * k2p, k3x, k3y, k3p);
    rhs(1.0, phi + dt * k3p, k4x, k4y, k4p);
    x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    phi += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    worst = std::max(worst, (Vec2(x, y) - pts[k + 1].xi).norm());
  }
  return worst;
}

}  // namespace ritp
