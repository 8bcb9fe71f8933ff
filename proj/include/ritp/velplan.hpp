#pragma once

// Rest-to-rest quintic s(t) on a fixed path, fitted by QP with sampled speed
// and acceleration limits.

#include <cmath>
#include <optional>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/itca.hpp"
#include "ritp/poly.hpp"
#include "ritp/qp.hpp"

namespace ritp {

struct VelocityConfig {
  double lambda = 0.5;
  double r1 = 0.0;
  double r2 = 1.0;
  double r3 = 1e-2;
  double samples_per_meter = 20.0;
  std::optional<double> t_max;  // unset: choose automatically
  double margin = 1.3;
  double retry_factor = 1.5;
  int retries = 4;
  double time_quantum = 0.0;    // > 0: round t_max up to a multiple of this
};

struct SpeedProfile {
  Eigen::VectorXd xi_t = Eigen::VectorXd::Zero(6);  // c5 .. c0
  double t_max = 0.0;
  int m_t = 0;
  double dt = 0.0;
  int zeta = 1;
  double s_end = 0.0;

  double s(double t, int deriv = 0) const { return poly_eval(xi_t, t, deriv); }
  double sample_t(int j) const { return j == m_t - 1 ? t_max : j * dt; }
};

/// Rest-to-rest minimum time under a trapezoidal (or triangular) speed profile.
inline double min_rest_to_rest_time(double s_end, double v_max, double a_max) {
  if (s_end <= 0.0) return 0.0;
  if (s_end >= v_max * v_max / a_max) return s_end / v_max + v_max / a_max;
  return 2.0 * std::sqrt(s_end / a_max);
}

namespace detail {

inline int time_samples(double s_end, const VelocityConfig& cfg) {
  const int ms = sample_count(s_end, cfg.samples_per_meter);
  return std::max(3, static_cast<int>(std::floor(ms * cfg.lambda)));
}

inline SpeedProfile solve_speed(double s_end, double v_max, double a_max, int zeta, double t_max,
                                const VelocityConfig& cfg) {
  SpeedProfile sp;
  sp.zeta = zeta;
  sp.s_end = s_end;
  sp.t_max = t_max;
  sp.m_t = time_samples(s_end, cfg);
  sp.dt = t_max / (sp.m_t - 1);

  QuadProgram qp(6);
  for (int j = 1; j + 1 < sp.m_t; ++j) {
    const double t = j * sp.dt;
    const Eigen::VectorXd k1 = basis_row(t, 5, 1);
    const Eigen::VectorXd k2 = basis_row(t, 5, 2);
    const Eigen::VectorXd k3 = basis_row(t, 5, 3);
    qp.H += 2.0 * (cfg.r1 * k1 * k1.transpose() + cfg.r2 * k2 * k2.transpose() +
                   cfg.r3 * k3 * k3.transpose());
  }
  qp.add_equality(basis_row(0.0, 5, 0), 0.0);
  qp.add_equality(basis_row(t_max, 5, 0), s_end);
  for (int d = 1; d <= 2; ++d) {
    qp.add_equality(basis_row(0.0, 5, d), 0.0);
    qp.add_equality(basis_row(t_max, 5, d), 0.0);
  }
  for (int j = 1; j + 1 < sp.m_t; ++j) {
    const double t = j * sp.dt;
    const Eigen::VectorXd k1 = basis_row(t, 5, 1);
    const Eigen::VectorXd k2 = basis_row(t, 5, 2);
    qp.add_inequality(k1, v_max);
    qp.add_inequality(-k1, v_max);
    qp.add_inequality(k2, a_max);
    qp.add_inequality(-k2, a_max);
  }
  sp.xi_t = solve(qp);

  // Path progress must not run backwards.
  const int dense = 10 * (sp.m_t - 1);
  for (int j = 0; j <= dense; ++j) {
    if (sp.s(t_max * j / dense, 1) < -1e-9 * std::max(1.0, s_end)) {
      throw Error(ErrorCode::Infeasible, "s(t) is not monotone");
    }
  }
  return sp;
}

inline double quantize_up(double t, double q) {
  if (q <= 0.0) return t;
  return std::ceil(t / q - 1e-9) * q;
}

}  // namespace detail

inline SpeedProfile plan_velocity(double s_end, double v_max, double a_max, int zeta,
                                  const VelocityConfig& cfg = {}) {
  if (!(s_end >= 0.0)) throw Error(ErrorCode::InvalidInput, "S_end must be >= 0");
  if (!(v_max > 0.0) || !(a_max > 0.0)) throw Error(ErrorCode::InvalidInput, "limits must be > 0");
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be in (0, 1)");
  if (s_end == 0.0) {
    SpeedProfile sp;
    sp.zeta = zeta;
    sp.m_t = detail::time_samples(0.0, cfg);
    return sp;
  }
  if (cfg.t_max) {
    if (!(*cfg.t_max > 0.0)) throw Error(ErrorCode::InvalidInput, "t_max must be > 0");
    return detail::solve_speed(s_end, v_max, a_max, zeta, detail::quantize_up(*cfg.t_max, cfg.time_quantum), cfg);
  }
  double t = cfg.margin * min_rest_to_rest_time(s_end, v_max, a_max);
  for (int attempt = 0;; ++attempt) {
    try {
      return detail::solve_speed(s_end, v_max, a_max, zeta, detail::quantize_up(t, cfg.time_quantum), cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible || attempt >= cfg.retries) throw;
    }
    t *= cfg.retry_factor;
  }
}

/// v_j = zeta * ds/dt at the M_t samples.
inline std::vector<double> signed_velocity(const SpeedProfile& sp) {
  std::vector<double> v(sp.m_t);
  for (int j = 0; j < sp.m_t; ++j) v[j] = sp.zeta * sp.s(sp.sample_t(j), 1);
  v.front() = 0.0;
  v.back() = 0.0;
  return v;
}

}  // namespace ritp
