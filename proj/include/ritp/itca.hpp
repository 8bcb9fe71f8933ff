#pragma once

// Iterative collision avoidance: fit polynomial flat outputs to a reference
// segment by equality-constrained QP, sample, check footprints, and raise the
// tracking weights around the first collision until the sampled path is clear.

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/geometry.hpp"
#include "ritp/poly.hpp"
#include "ritp/qp.hpp"
#include "ritp/refpath.hpp"
#include "ritp/scenario.hpp"

namespace ritp {

struct ItcaConfig {
  int alpha = 4;
  int m = 2;  // terminal smoothing offset, 0 disables
  double beta = 1.2;
  int z = 3;
  double q1 = 1.0;
  double q2 = 1e-3;
  double q3 = 1e-2;
  int max_iters = 10;
  double samples_per_meter = 20.0;
  bool paper_exact_tsc = false;  // cosine rows only

  void validate() const {
    if (alpha < 3 || alpha > 5) throw Error(ErrorCode::InvalidConfig, "alpha must be in [3, 5]");
    if (m < 0) throw Error(ErrorCode::InvalidConfig, "m must be >= 0");
    if (!(beta > 1.0)) throw Error(ErrorCode::InvalidConfig, "beta must be > 1");
    if (z < 0) throw Error(ErrorCode::InvalidConfig, "z must be >= 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 1");
    if (!(q1 >= 0 && q2 >= 0 && q3 >= 0)) throw Error(ErrorCode::InvalidConfig, "weights must be >= 0");
    if (!(samples_per_meter > 0)) throw Error(ErrorCode::InvalidConfig, "samples_per_meter must be > 0");
  }
};

inline int sample_count(double s_end, double samples_per_meter) {
  return std::max(2, static_cast<int>(std::floor(s_end * samples_per_meter + 0.5)));
}

/// Planned flat output f(s) = (Kx(s), Ky(s)) on s in [0, s_end].
struct PolyPath {
  int alpha = 4;
  Eigen::VectorXd xi_x;
  Eigen::VectorXd xi_y;
  double s_end = 0.0;
  int m_s = 2;
  double d = 0.0;

  Vec2 eval(double s, int deriv = 0) const {
    const Eigen::VectorXd k = basis_row(s, alpha, deriv);
    return {k.dot(xi_x), k.dot(xi_y)};
  }
  double sample_s(int j) const { return j == m_s - 1 ? s_end : j * d; }
};

struct ErrorVector {
  std::vector<double> e;

  static ErrorVector ones(std::size_t n) { return {std::vector<double>(n, 1.0)}; }
  std::size_t size() const { return e.size(); }
};

/// Multiplies the entries within z of index ic (0-based) by beta.
inline ErrorVector update_error(ErrorVector ev, std::size_t ic, const ItcaConfig& cfg) {
  if (ev.e.empty()) return ev;
  ic = std::min(ic, ev.e.size() - 1);
  const std::size_t lo = ic >= static_cast<std::size_t>(cfg.z) ? ic - cfg.z : 0;
  const std::size_t hi = std::min(ev.e.size() - 1, ic + static_cast<std::size_t>(cfg.z));
  for (std::size_t k = lo; k <= hi; ++k) ev.e[k] *= cfg.beta;
  return ev;
}

inline QuadProgram assemble_qp(const PiecewisePath& ref, const ErrorVector& ev, const ItcaConfig& cfg) {
  cfg.validate();
  const std::size_t nref = ref.size();
  if (nref < 2 || ev.size() != nref) throw Error(ErrorCode::InvalidInput, "error vector / reference size mismatch");
  const int nc = cfg.alpha + 1;
  const double s_end = ref.length();
  const int ms = sample_count(s_end, cfg.samples_per_meter);
  const double d = s_end / (ms - 1);
  if (cfg.m >= 1 && 1 + cfg.m >= ms - cfg.m) {
    throw Error(ErrorCode::InvalidConfig, "TSC offset m=" + std::to_string(cfg.m) + " too large for " +
                                              std::to_string(ms) + " samples");
  }

  QuadProgram qp(2 * nc);
  Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(nc, nc);  // shared per-axis block
  Eigen::VectorXd fx = Eigen::VectorXd::Zero(nc);
  Eigen::VectorXd fy = Eigen::VectorXd::Zero(nc);
  for (std::size_t k = 0; k < nref; ++k) {
    const Eigen::VectorXd K = basis_row(ref.arc_length[k], cfg.alpha, 0);
    const double w = 2.0 * cfg.q1 * ev.e[k];
    hb += w * K * K.transpose();
    fx -= w * ref.points[k].x() * K;
    fy -= w * ref.points[k].y() * K;
  }
  for (int j = 0; j < ms; ++j) {
    const double s = j == ms - 1 ? s_end : j * d;
    const Eigen::VectorXd K1 = basis_row(s, cfg.alpha, 1);
    const Eigen::VectorXd K2 = basis_row(s, cfg.alpha, 2);
    hb += 2.0 * cfg.q2 * K1 * K1.transpose() + 2.0 * cfg.q3 * K2 * K2.transpose();
  }
  qp.H.topLeftCorner(nc, nc) = hb;
  qp.H.bottomRightCorner(nc, nc) = hb;
  qp.f << fx, fy;

  auto axis_row = [&](const Eigen::VectorXd& K, int axis) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * nc);
    row.segment(axis * nc, nc) = K;
    return row;
  };
  const Eigen::VectorXd k0 = basis_row(0.0, cfg.alpha, 0);
  const Eigen::VectorXd ke = basis_row(s_end, cfg.alpha, 0);
  const Vec2& p0 = ref.points.front();
  const Vec2& pe = ref.points.back();
  for (int a = 0; a < 2; ++a) {
    qp.add_equality(axis_row(k0, a), p0(a));
    qp.add_equality(axis_row(ke, a), pe(a));
  }
  if (cfg.m >= 1) {
    // zeta * (K(s_{1+m}) Xi - p_1) . b = m d cos/sin(phi_1), and the mirrored row at the end.
    const double md = cfg.m * d;
    const Eigen::VectorXd ka = basis_row(cfg.m * d, cfg.alpha, 0);
    const Eigen::VectorXd kb = basis_row(s_end - cfg.m * d, cfg.alpha, 0);
    const double c0 = std::cos(ref.yaws.front()), s0 = std::sin(ref.yaws.front());
    const double ce = std::cos(ref.yaws.back()), se = std::sin(ref.yaws.back());
    const int z = ref.zeta;
    qp.add_equality(axis_row(ka, 0), p0.x() + z * md * c0);
    qp.add_equality(axis_row(kb, 0), pe.x() - z * md * ce);
    if (!cfg.paper_exact_tsc) {
      qp.add_equality(axis_row(ka, 1), p0.y() + z * md * s0);
      qp.add_equality(axis_row(kb, 1), pe.y() - z * md * se);
    }
  }
  return qp;
}

inline PolyPath make_poly_path(const Eigen::VectorXd& sol, double s_end, const ItcaConfig& cfg) {
  const int nc = cfg.alpha + 1;
  PolyPath pp;
  pp.alpha = cfg.alpha;
  pp.xi_x = sol.head(nc);
  pp.xi_y = sol.tail(nc);
  pp.s_end = s_end;
  pp.m_s = sample_count(s_end, cfg.samples_per_meter);
  pp.d = s_end / (pp.m_s - 1);
  return pp;
}

/// Poses at the M_s path samples; heading from consecutive differences.
inline std::vector<Pose> sample_path(const PolyPath& pp, int zeta) {
  std::vector<Vec2> pts(pp.m_s);
  for (int j = 0; j < pp.m_s; ++j) pts[j] = pp.eval(pp.sample_s(j));
  std::vector<Pose> out(pp.m_s);
  for (int j = 0; j < pp.m_s; ++j) {
    double th;
    if (j + 1 < pp.m_s) {
      const Vec2 dv = pts[j + 1] - pts[j];
      th = std::atan2(dv.y(), dv.x());
    } else {
      th = out[j - 1].phi;
      if (zeta < 0) th -= M_PI;  // undo the flip applied below
    }
    if (zeta < 0) th += M_PI;
    out[j] = {pts[j].x(), pts[j].y(), wrap_angle(th)};
  }
  return out;
}

/// Discrete heading mismatch at both terminals, measured between sample 0
/// and sample `offset` (and mirrored at the end).
inline std::pair<double, double> terminal_yaw_mismatch(const PolyPath& pp, const PiecewisePath& ref,
                                                       int offset) {
  offset = std::clamp(offset, 1, pp.m_s - 1);
  const Vec2 a = pp.eval(pp.sample_s(offset)) - pp.eval(0.0);
  const Vec2 b = pp.eval(pp.s_end) - pp.eval(pp.sample_s(pp.m_s - 1 - offset));
  const double flip = ref.zeta < 0 ? M_PI : 0.0;
  const double th0 = std::atan2(a.y(), a.x()) + flip;
  const double th1 = std::atan2(b.y(), b.x()) + flip;
  return {std::abs(wrap_angle(th0 - ref.yaws.front())), std::abs(wrap_angle(th1 - ref.yaws.back()))};
}

/// Index of the reference point nearest to p (lowest index on ties).
inline std::size_t nearest_reference_index(const PiecewisePath& ref, const Vec2& p) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double dist = (ref.points[k] - p).squaredNorm();
    if (dist < bd) {
      bd = dist;
      best = k;
    }
  }
  return best;
}

struct ItcaResult {
  PolyPath path;
  std::vector<Pose> poses;
  int iterations = 0;
  ErrorVector e;
  std::vector<std::size_t> collision_indices;  // I_c per failed iteration
};

/// Optional extra test on a candidate path; returns a colliding position.
using PathCheck = std::function<std::optional<Vec2>(const PolyPath&)>;

inline ItcaResult plan_segment(const PiecewisePath& ref, std::span<const ConvexPolygon> obstacles,
                               const VehicleGeom& geom, const ItcaConfig& cfg,
                               const PathCheck& extra_check = {},
                               const std::atomic<bool>* cancel = nullptr) {
  cfg.validate();
  ItcaResult res;
  res.e = ErrorVector::ones(ref.size());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (cancel && cancel->load(std::memory_order_relaxed)) {
      throw Error(ErrorCode::PlanningFailed, "cancelled");
    }
    res.iterations = it;
    const QuadProgram qp = assemble_qp(ref, res.e, cfg);
    res.path = make_poly_path(solve_eq(qp), ref.length(), cfg);
    res.poses = sample_path(res.path, ref.zeta);

    std::optional<Vec2> hit;
    for (const Pose& p : res.poses) {
      if (!collision_free_pose(p, geom, obstacles)) {
        hit = p.position();
        break;
      }
    }
    if (!hit && extra_check) hit = extra_check(res.path);
    if (!hit) return res;

    const std::size_t ic = nearest_reference_index(ref, *hit);
    res.collision_indices.push_back(ic);
    res.e = update_error(std::move(res.e), ic, cfg);
  }
  throw Error(ErrorCode::IterationLimit,
              "no collision-free path after " + std::to_string(cfg.max_iters) + " iterations");
}

inline ItcaResult plan_segment(const PiecewisePath& ref, const Scenario& sc, const ItcaConfig& cfg,
                               const PathCheck& extra_check = {},
                               const std::atomic<bool>* cancel = nullptr) {
  const auto obstacles = sc.collision_set();
  return plan_segment(ref, obstacles, sc.vehicle, cfg, extra_check, cancel);
}

}  // namespace ritp
