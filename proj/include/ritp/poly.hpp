#pragma once

// Monomial rows with the highest power first: [s^a, ..., s, 1] and derivatives.

#include <Eigen/Dense>

#include "ritp/errors.hpp"

namespace ritp {

/// Row K^(deriv)(s) such that f^(deriv)(s) = K^(deriv)(s) . coeffs.
inline Eigen::VectorXd basis_row(double s, int order, int deriv = 0) {
  if (order < 0 || deriv < 0) throw Error(ErrorCode::InvalidInput, "negative order or derivative");
  Eigen::VectorXd row = Eigen::VectorXd::Zero(order + 1);
  for (int i = 0; i <= order; ++i) {
    const int p = order - i;  // power of this column
    if (p < deriv) continue;
    double c = 1.0;
    for (int k = 0; k < deriv; ++k) c *= p - k;
    double sp = 1.0;
    for (int k = 0; k < p - deriv; ++k) sp *= s;
    row(i) = c * sp;
  }
  return row;
}

inline double poly_eval(const Eigen::VectorXd& coeffs, double s, int deriv = 0) {
  return basis_row(s, static_cast<int>(coeffs.size()) - 1, deriv).dot(coeffs);
}

}  // namespace ritp
