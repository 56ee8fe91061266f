#pragma once

#include <functional>
#include <vector>

#include "prfem/mesh.hpp"

namespace prfem {

/// Quadrature rule on a reference domain: the triangle with vertices
/// (0,0), (1,0), (0,1) (measure 1/2) or the interval [0,1] (measure 1).
/// For edge rules only the x coordinate of each point is used.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxTriangleDegree = 12;
inline constexpr int kMaxEdgeDegree = 21;

/// Positive-weight rule on the reference triangle exact for total degree
/// <= d. Collapsed (Stroud conical product) Gauss-Jacobi x Gauss-Legendre.
const QuadratureRule &triangle_rule(int d);

/// Gauss-Legendre rule on [0,1] with ceil((d+1)/2) points.
const QuadratureRule &edge_rule(int d);

/// Quadrature points and weights mapped to physical space.
struct PhysicalQuadrature {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Composite rule on a cell built over its sub-triangulation.
PhysicalQuadrature cell_quadrature(const PolygonalMesh &mesh, int cell, int exactness);

/// Rule on the segment [a, b]; weights include the segment length.
PhysicalQuadrature segment_quadrature(const Point &a, const Point &b, int exactness);

/// Edge addressed the same way as CellEdge.
PhysicalQuadrature edge_quadrature(const PolygonalMesh &mesh, CellEdge edge, int exactness);

double integrate_cell(const PolygonalMesh &mesh, int cell,
                      const std::function<double(const Point &)> &f, int exactness);

double integrate_edge(const PolygonalMesh &mesh, CellEdge edge,
                      const std::function<double(const Point &)> &f, int exactness);

} // namespace prfem
