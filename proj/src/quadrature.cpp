#include "prfem/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "prfem/error.hpp"

namespace prfem {

namespace {

struct Gauss1D {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights; // for weight (1-t)^alpha
};

// Golub-Welsch for the Jacobi weight (1-t)^alpha (1+t)^beta with beta = 0.
Gauss1D gauss_jacobi(int n, double alpha) {
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double ab = alpha + beta;
    const double s = 2.0 * i + ab;
    J(i, i) = (i == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (i + 1 < n) {
      const double k = i + 1.0;
      const double sk = 2.0 * k + ab;
      const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
      const double den = sk * sk * (sk + 1.0) * (sk - 1.0);
      J(i, i + 1) = J(i + 1, i) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  // Total mass of the weight on [-1, 1].
  const double mu0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0);
  Gauss1D g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    g.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    g.weights[i] = mu0 * v0 * v0;
  }
  return g;
}

int points_for(int d) { return std::max(1, (d + 2) / 2); }

QuadratureRule make_edge_rule(int d) {
  const int n = points_for(d);
  const Gauss1D g = gauss_jacobi(n, 0.0);
  QuadratureRule r;
  r.exactness_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    // Enforce exact symmetry about 1/2.
    const double t = 0.5 * (g.nodes[i] - g.nodes[n - 1 - i]);
    const double w = 0.5 * (g.weights[i] + g.weights[n - 1 - i]);
    r.points.emplace_back(0.5 * (1.0 + t), 0.0);
    r.weights.push_back(0.5 * w);
  }
  return r;
}

QuadratureRule make_triangle_rule(int d) {
  const int n = points_for(d);
  const Gauss1D gj = gauss_jacobi(n, 1.0);
  const Gauss1D gl = gauss_jacobi(n, 0.0);
  QuadratureRule r;
  r.exactness_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + gj.nodes[i]);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (1.0 + gl.nodes[j]);
      r.points.emplace_back(u, (1.0 - u) * v);
      r.weights.push_back(0.125 * gj.weights[i] * gl.weights[j]);
    }
  }
  return r;
}

} // namespace

const QuadratureRule &triangle_rule(int d) {
  if (d < 0 || d > kMaxTriangleDegree)
    throw DomainError("triangle_rule: unsupported exactness degree " + std::to_string(d));
  static std::array<QuadratureRule, kMaxTriangleDegree + 1> rules;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 0; k <= kMaxTriangleDegree; ++k) rules[k] = make_triangle_rule(k);
  });
  return rules[d];
}

const QuadratureRule &edge_rule(int d) {
  if (d < 0 || d > kMaxEdgeDegree)
    throw DomainError("edge_rule: unsupported exactness degree " + std::to_string(d));
  static std::array<QuadratureRule, kMaxEdgeDegree + 1> rules;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 0; k <= kMaxEdgeDegree; ++k) rules[k] = make_edge_rule(k);
  });
  return rules[d];
}

PhysicalQuadrature cell_quadrature(const PolygonalMesh &mesh, int cell, int exactness) {
  const QuadratureRule &rule = triangle_rule(exactness);
  PhysicalQuadrature q;
  const auto tris = mesh.subtriangles(cell);
  q.points.reserve(tris.size() * rule.size());
  q.weights.reserve(tris.size() * rule.size());
  for (const auto &t : tris) {
    const Point e1 = t[1] - t[0];
    const Point e2 = t[2] - t[0];
    const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Point &r = rule.points[i];
      q.points.push_back(t[0] + r.x() * e1 + r.y() * e2);
      q.weights.push_back(rule.weights[i] * jac);
    }
  }
  return q;
}

PhysicalQuadrature segment_quadrature(const Point &a, const Point &b, int exactness) {
  const QuadratureRule &rule = edge_rule(exactness);
  const double len = (b - a).norm();
  PhysicalQuadrature q;
  q.points.reserve(rule.size());
  q.weights.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    q.points.push_back(a + rule.points[i].x() * (b - a));
    q.weights.push_back(rule.weights[i] * len);
  }
  return q;
}

PhysicalQuadrature edge_quadrature(const PolygonalMesh &mesh, CellEdge edge, int exactness) {
  const auto &v = mesh.vertices();
  const auto vs = edge.boundary ? mesh.boundary_edges()[edge.index].vertices
                                : mesh.interior_edges()[edge.index].vertices;
  return segment_quadrature(v[vs[0]], v[vs[1]], exactness);
}

double integrate_cell(const PolygonalMesh &mesh, int cell,
                      const std::function<double(const Point &)> &f, int exactness) {
  const auto q = cell_quadrature(mesh, cell, exactness);
  double s = 0.0;
  for (std::size_t i = 0; i < q.weights.size(); ++i) s += q.weights[i] * f(q.points[i]);
  return s;
}

double integrate_edge(const PolygonalMesh &mesh, CellEdge edge,
                      const std::function<double(const Point &)> &f, int exactness) {
  const auto q = edge_quadrature(mesh, edge, exactness);
  double s = 0.0;
  for (std::size_t i = 0; i < q.weights.size(); ++i) s += q.weights[i] * f(q.points[i]);
  return s;
}

} // namespace prfem
