#pragma once

// Dense convex QP:  min 1/2 x'Hx + f'x  s.t.  Aeq x = beq,  Ain x <= bin.
//
// Equality-only problems are solved through one KKT factorization; with
// inequalities a primal active-set method runs from a phase-1 feasible point.
// Variables are equilibrated (Jacobi scaling) before factorization, which
// matters for monomial bases evaluated at s ~ 10.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ritp/errors.hpp"

namespace ritp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QuadProgram {
  MatrixXd H;
  VectorXd f;
  MatrixXd Aeq;
  VectorXd beq;
  MatrixXd Ain;
  VectorXd bin;

  QuadProgram() = default;
  explicit QuadProgram(Eigen::Index n)
      : H(MatrixXd::Zero(n, n)), f(VectorXd::Zero(n)), Aeq(0, n), beq(0), Ain(0, n), bin(0) {}

  Eigen::Index num_vars() const { return H.rows(); }

  void add_equality(const VectorXd& row, double rhs) {
    Aeq.conservativeResize(Aeq.rows() + 1, H.cols());
    Aeq.row(Aeq.rows() - 1) = row.transpose();
    beq.conservativeResize(beq.size() + 1);
    beq(beq.size() - 1) = rhs;
  }

  void add_inequality(const VectorXd& row, double rhs) {
    Ain.conservativeResize(Ain.rows() + 1, H.cols());
    Ain.row(Ain.rows() - 1) = row.transpose();
    bin.conservativeResize(bin.size() + 1);
    bin(bin.size() - 1) = rhs;
  }

  double objective(const VectorXd& x) const { return 0.5 * x.dot(H * x) + f.dot(x); }
};

struct QpResult {
  VectorXd x;
  int iterations = 0;
  std::vector<int> active;              // inequality rows active at the solution
  std::vector<double> objective_trace;  // phase-2 objective after every step
  std::vector<std::string> warnings;
};

namespace detail {

inline constexpr double kQpRegularization = 1e-10;

struct Scaled {
  QuadProgram qp;
  VectorXd scale;  // x = scale .* y
};

inline Scaled equilibrate(const QuadProgram& in) {
  const Eigen::Index n = in.num_vars();
  Scaled s;
  s.scale.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = std::sqrt(std::max(in.H(j, j), 0.0));
    if (in.Aeq.rows() > 0) d = std::max(d, in.Aeq.col(j).cwiseAbs().maxCoeff());
    if (in.Ain.rows() > 0) d = std::max(d, in.Ain.col(j).cwiseAbs().maxCoeff());
    s.scale(j) = d > 1e-300 ? 1.0 / d : 1.0;
  }
  const auto S = s.scale.asDiagonal();
  s.qp.H = S * (0.5 * (in.H + in.H.transpose())) * S;
  s.qp.f = S * in.f;
  s.qp.Aeq = in.Aeq * S;
  s.qp.beq = in.beq;
  s.qp.Ain = in.Ain * S;
  s.qp.bin = in.bin;
  auto normalize_rows = [](MatrixXd& A, VectorXd& b) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double r = A.row(i).norm();
      if (r > 0.0) {
        A.row(i) /= r;
        b(i) /= r;
      }
    }
  };
  normalize_rows(s.qp.Aeq, s.qp.beq);
  normalize_rows(s.qp.Ain, s.qp.bin);
  return s;
}

/// Drops linearly dependent equality rows. Throws Infeasible if a dropped row
/// contradicts the kept ones.
inline void reduce_equalities(MatrixXd& A, VectorXd& b, std::vector<std::string>& warnings) {
  if (A.rows() == 0) return;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  if (r == A.rows()) return;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < r; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  MatrixXd Ak(r, A.cols());
  VectorXd bk(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    Ak.row(i) = A.row(keep[i]);
    bk(i) = b(keep[i]);
  }
  // A redundant row must be consistent with the kept rows.
  const VectorXd x = Ak.completeOrthogonalDecomposition().solve(bk);
  if ((A * x - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::Infeasible, "inconsistent equality constraints");
  }
  warnings.push_back("dropped " + std::to_string(A.rows() - r) + " redundant equality row(s)");
  A = std::move(Ak);
  b = std::move(bk);
}

/// Solves [H A'; A 0][x; mu] = [rhs_x; rhs_c]. Regularizes H once if the KKT
/// matrix is singular, then gives up with SingularKKT.
inline VectorXd kkt_solve(const MatrixXd& H, const MatrixXd& A, const VectorXd& rhs_x,
                          const VectorXd& rhs_c) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = A.rows();
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  VectorXd rhs(n + m);
  rhs << rhs_x, rhs_c;
  const MatrixXd K0 = K;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::FullPivLU<MatrixXd> lu(K);
    lu.setThreshold(1e-13);
    if (lu.isInvertible()) {
      VectorXd sol = lu.solve(rhs);
      // One step of iterative refinement.
      sol += lu.solve(rhs - K * sol);
      // A regularized answer is only kept if it still solves the original
      // system; otherwise the problem is unbounded or ill-posed.
      if (attempt == 0 ||
          (K0 * sol - rhs).lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
        return sol;
      }
      break;
    }
    K.topLeftCorner(n, n) += kQpRegularization * MatrixXd::Identity(n, n);
  }
  throw Error(ErrorCode::SingularKKT, "KKT matrix is singular");
}

inline QpResult active_set(const QuadProgram& qp, VectorXd x, int max_iter, double tol) {
  const Eigen::Index n = qp.num_vars();
  const Eigen::Index me = qp.Aeq.rows();
  const Eigen::Index mi = qp.Ain.rows();
  std::vector<int> work;  // inequality rows in the working set
  QpResult res;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::Index mw = me + static_cast<Eigen::Index>(work.size());
    MatrixXd A(mw, n);
    if (me > 0) A.topRows(me) = qp.Aeq;
    for (std::size_t k = 0; k < work.size(); ++k) A.row(me + static_cast<Eigen::Index>(k)) = qp.Ain.row(work[k]);

    const VectorXd g = qp.H * x + qp.f;
    const VectorXd sol = kkt_solve(qp.H, A, -g, VectorXd::Zero(mw));
    const VectorXd p = sol.head(n);

    if (p.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      const VectorXd mu = sol.tail(mw);
      int drop = -1;
      double most_negative = -tol;
      for (std::size_t k = 0; k < work.size(); ++k) {
        const double m = mu(me + static_cast<Eigen::Index>(k));
        // Most negative multiplier leaves; lowest row index on exact ties.
        if (m < most_negative || (drop >= 0 && m == most_negative && work[k] < work[drop])) {
          most_negative = m;
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) {
        res.x = x;
        res.active = work;
        std::sort(res.active.begin(), res.active.end());
        return res;
      }
      work.erase(work.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (std::find(work.begin(), work.end(), static_cast<int>(i)) != work.end()) continue;
      const double ap = qp.Ain.row(i).dot(p);
      if (ap <= tol) continue;
      const double step = std::max(0.0, (qp.bin(i) - qp.Ain.row(i).dot(x)) / ap);
      if (step < alpha) {
        alpha = step;
        blocking = static_cast<int>(i);
      }
    }
    x += alpha * p;
    res.objective_trace.push_back(qp.objective(x));
    if (blocking >= 0) work.push_back(blocking);
  }
  throw Error(ErrorCode::MaxIterations, "active set did not settle in " + std::to_string(max_iter) +
                                            " iterations");
}

}  // namespace detail

/// Equality-constrained solve (inequality rows, if any, are ignored).
inline VectorXd solve_eq(const QuadProgram& qp) {
  auto s = detail::equilibrate(qp);
  std::vector<std::string> warnings;
  detail::reduce_equalities(s.qp.Aeq, s.qp.beq, warnings);
  const VectorXd sol = detail::kkt_solve(s.qp.H, s.qp.Aeq, -s.qp.f, s.qp.beq);
  return s.scale.cwiseProduct(sol.head(qp.num_vars()));
}

/// General solve with full diagnostics.
inline QpResult solve_detailed(const QuadProgram& qp, double tol = 1e-10) {
  const Eigen::Index n = qp.num_vars();
  auto s = detail::equilibrate(qp);
  QpResult res;
  detail::reduce_equalities(s.qp.Aeq, s.qp.beq, res.warnings);
  const QuadProgram& q = s.qp;
  const Eigen::Index mi = q.Ain.rows();
  const int max_iter = 50 * static_cast<int>(n + mi);

  // Least-norm point on the equality manifold.
  VectorXd x0 = VectorXd::Zero(n);
  if (q.Aeq.rows() > 0) x0 = q.Aeq.completeOrthogonalDecomposition().solve(q.beq);

  if (mi > 0) {
    const double viol = (q.Ain * x0 - q.bin).maxCoeff();
    if (viol > tol) {
      // Phase 1 over (x, sigma): shift every inequality by sigma >= 0 and
      // drive sigma to zero; the small proximal term keeps the problem strictly convex.
      constexpr double kProx = 1e-8;
      QuadProgram p1(n + 1);
      p1.H.topLeftCorner(n, n) = kProx * MatrixXd::Identity(n, n);
      p1.H(n, n) = 1.0;
      p1.f.head(n) = -kProx * x0;
      p1.f(n) = 1.0;
      p1.Aeq = MatrixXd::Zero(q.Aeq.rows(), n + 1);
      p1.Aeq.leftCols(n) = q.Aeq;
      p1.beq = q.beq;
      p1.Ain = MatrixXd::Zero(mi + 1, n + 1);
      p1.Ain.topLeftCorner(mi, n) = q.Ain;
      p1.Ain.block(0, n, mi, 1).setConstant(-1.0);
      p1.Ain(mi, n) = -1.0;
      p1.bin = VectorXd::Zero(mi + 1);
      p1.bin.head(mi) = q.bin;
      VectorXd z0(n + 1);
      z0 << x0, viol;
      const QpResult r1 = detail::active_set(p1, z0, 50 * static_cast<int>(n + 1 + mi + 1), tol);
      if (r1.x(n) > 1e-9) {
        throw Error(ErrorCode::Infeasible,
                    "no feasible point (phase-1 residual " + std::to_string(r1.x(n)) + ")");
      }
      x0 = r1.x.head(n);
    }
  }

  QpResult r2 = detail::active_set(q, x0, max_iter, tol);
  r2.x = s.scale.cwiseProduct(r2.x);
  r2.warnings = std::move(res.warnings);
  return r2;
}

inline VectorXd solve(const QuadProgram& qp) { return solve_detailed(qp).x; }

}  // namespace ritp
