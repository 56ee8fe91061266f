#pragma once

#include <span>
#include <utility>

#include <Eigen/Core>

#include "prfem/mesh.hpp"

namespace prfem {

/// Local polynomial space P_m expressed in the scaled monomials
/// ((x - center) / scale)^a ((y - center) / scale)^b, a + b <= m.
/// Monomials are ordered by total degree, then by the power of y.
struct PolynomialSpec {
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;

  int dimension() const { return (degree + 1) * (degree + 2) / 2; }

  /// Exponents (a, b) of monomial i.
  static std::pair<int, int> exponents(int i);

  Eigen::VectorXd values(const Point &x) const;
  /// Row 0: d/dx, row 1: d/dy.
  Eigen::Matrix<double, 2, Eigen::Dynamic> gradients(const Point &x) const;
};

/// Rows: monomials of `spec` evaluated at each point.
Eigen::MatrixXd collocation_matrix(const PolynomialSpec &spec, std::span<const Point> points);

} // namespace prfem
