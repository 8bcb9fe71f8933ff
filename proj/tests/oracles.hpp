#pragma once

// Reference computations used to cross-check the library. None of them call
// into the code under test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

/// Oriented rectangle given by center, half extents and angle.
struct Rect {
  double cx, cy, hx, hy, ang;

  bool contains(double px, double py) const {
    const double dx = px - cx, dy = py - cy;
    const double c = std::cos(ang), s = std::sin(ang);
    return std::abs(dx * c + dy * s) <= hx && std::abs(-dx * s + dy * c) <= hy;
  }
  std::vector<Eigen::Vector2d> corners() const {
    const double c = std::cos(ang), s = std::sin(ang);
    const Eigen::Vector2d u(c, s), v(-s, c), o(cx, cy);
    return {o - hx * u - hy * v, o + hx * u - hy * v, o + hx * u + hy * v, o - hx * u + hy * v};
  }
  void bounds(double& x0, double& x1, double& y0, double& y1) const {
    x0 = y0 = std::numeric_limits<double>::infinity();
    x1 = y1 = -x0;
    for (const auto& p : corners()) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
  }
};

/// Overlap by scanning a 1 mm lattice over the common bounding box.
inline bool grid_overlap(const Rect& a, const Rect& b, double h = 1e-3) {
  double ax0, ax1, ay0, ay1, bx0, bx1, by0, by1;
  a.bounds(ax0, ax1, ay0, ay1);
  b.bounds(bx0, bx1, by0, by1);
  const double x0 = std::max(ax0, bx0), x1 = std::min(ax1, bx1);
  const double y0 = std::max(ay0, by0), y1 = std::min(ay1, by1);
  if (x0 > x1 || y0 > y1) return false;
  for (double x = std::floor(x0 / h) * h; x <= x1; x += h) {
    for (double y = std::floor(y0 / h) * h; y <= y1; y += h) {
      if (a.contains(x, y) && b.contains(x, y)) return true;
    }
  }
  return false;
}

inline double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

/// Signed clearance: separation distance when apart, minus the penetration
/// depth when overlapping. Used to skip pairs inside the lattice resolution band.
inline double signed_clearance(const Rect& a, const Rect& b) {
  const auto ca = a.corners(), cb = b.corners();
  // Minimum overlap over the four edge normals (separating axes).
  double min_overlap = std::numeric_limits<double>::infinity();
  for (const Rect* r : {&a, &b}) {
    for (double ang : {r->ang, r->ang + M_PI / 2}) {
      const Eigen::Vector2d axis(std::cos(ang), std::sin(ang));
      double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
      for (const auto& p : ca) {
        a0 = std::min(a0, p.dot(axis));
        a1 = std::max(a1, p.dot(axis));
      }
      for (const auto& p : cb) {
        b0 = std::min(b0, p.dot(axis));
        b1 = std::max(b1, p.dot(axis));
      }
      min_overlap = std::min(min_overlap, std::min(a1, b1) - std::max(a0, b0));
    }
  }
  if (min_overlap > 0) return -min_overlap;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (const auto& p : ca) d = std::min(d, point_segment_distance(p, cb[i], cb[(i + 1) % 4]));
    for (const auto& p : cb) d = std::min(d, point_segment_distance(p, ca[i], ca[(i + 1) % 4]));
  }
  return d;
}

/// Equality-constrained QP through an explicit null-space basis.
inline Eigen::VectorXd null_space_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                     const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index r = (svd.singularValues().array() > 1e-12 * svd.singularValues()(0)).count();
  const Eigen::VectorXd xp = svd.solve(b);
  const Eigen::MatrixXd Z = svd.matrixV().rightCols(A.cols() - r);
  const Eigen::VectorXd y = (Z.transpose() * H * Z).ldlt().solve(-Z.transpose() * (H * xp + f));
  return xp + Z * y;
}

/// Strictly convex inequality QP by accelerated projected gradient on the dual
///   max_{mu >= 0}  -1/2 (f + A'mu)' H^-1 (f + A'mu) - b'mu.
inline Eigen::VectorXd dual_projected_gradient(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                               const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                               int max_iter = 1000000) {
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  const Eigen::MatrixXd Hinv = llt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
  const Eigen::MatrixXd M = A * Hinv * A.transpose();
  const Eigen::VectorXd c = A * Hinv * f + b;
  const double Lc = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(Lc, 1e-12);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(A.rows()), prev = mu, y = mu;
  double tk = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    // Gradient of the (negated, minimized) dual: M mu + c.
    mu = (y - step * (M * y + c)).cwiseMax(0.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = mu + ((tk - 1.0) / tn) * (mu - prev);
    tk = tn;
    if ((mu - prev).lpNorm<Eigen::Infinity>() < 1e-15 && it > 100) break;
    if (it % 1000 == 0 && (M * mu + c).dot(mu) < 0) {  // restart on oscillation
      tk = 1.0;
      y = mu;
    }
    prev = mu;
  }
  return -Hinv * (f + A.transpose() * mu);
}

}  // namespace oracle
