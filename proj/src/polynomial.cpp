#include "prfem/polynomial.hpp"

#include <cmath>

namespace prfem {

std::pair<int, int> PolynomialSpec::exponents(int i) {
  int d = 0;
  while ((d + 1) * (d + 2) / 2 <= i) ++d;
  const int j = i - d * (d + 1) / 2;
  return {d - j, j};
}

namespace {

// Powers 0..m of t.
void powers(double t, int m, double *out) {
  out[0] = 1.0;
  for (int i = 1; i <= m; ++i) out[i] = out[i - 1] * t;
}

} // namespace

Eigen::VectorXd PolynomialSpec::values(const Point &x) const {
  const double sx = (x.x() - center.x()) / scale;
  const double sy = (x.y() - center.y()) / scale;
  double px[16], py[16];
  powers(sx, degree, px);
  powers(sy, degree, py);
  Eigen::VectorXd v(dimension());
  int i = 0;
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) v(i++) = px[d - j] * py[j];
  return v;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> PolynomialSpec::gradients(const Point &x) const {
  const double sx = (x.x() - center.x()) / scale;
  const double sy = (x.y() - center.y()) / scale;
  double px[16], py[16];
  powers(sx, degree, px);
  powers(sy, degree, py);
  Eigen::Matrix<double, 2, Eigen::Dynamic> g(2, dimension());
  int i = 0;
  for (int d = 0; d <= degree; ++d) {
    for (int j = 0; j <= d; ++j) {
      const int a = d - j;
      g(0, i) = a > 0 ? a * px[a - 1] * py[j] / scale : 0.0;
      g(1, i) = j > 0 ? j * px[a] * py[j - 1] / scale : 0.0;
      ++i;
    }
  }
  return g;
}

Eigen::MatrixXd collocation_matrix(const PolynomialSpec &spec, std::span<const Point> points) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(points.size()), spec.dimension());
  for (std::size_t r = 0; r < points.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = spec.values(points[r]).transpose();
  return a;
}

} // namespace prfem
