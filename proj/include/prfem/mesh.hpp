#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace prfem {

using Point = Eigen::Vector2d;

/// A triangle given by its three corners, used for sub-decompositions.
using Triangle = std::array<Point, 3>;

/// Edge shared by two cells. `left` is the lower-indexed cell and the
/// normal is the outward normal of `left` on this edge.
struct InteriorEdge {
  std::array<int, 2> vertices;
  int left;
  int right;
  Point normal;
  double length;
};

/// Edge on the domain boundary with the outward normal of its owner.
struct BoundaryEdge {
  std::array<int, 2> vertices;
  int owner;
  Point normal;
  double length;
};

/// Reference from a cell to one of its edges.
struct CellEdge {
  bool boundary;
  int index; ///< into interior_edges() or boundary_edges()
};

/**
 * Immutable 2D polygonal mesh.
 *
 * Cells are counter-clockwise vertex loops. Edges are derived from cell
 * adjacency and classified into interior and boundary sets. Every cell
 * carries its area, barycenter (area centroid), diameter and a
 * sub-triangulation used for quadrature.
 */
class PolygonalMesh {
public:
  PolygonalMesh() = default;

  /// Builds topology and geometry. Clockwise loops are reversed; degenerate
  /// or non-manifold input raises MeshError.
  PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_edges() const { return interior_.size() + boundary_.size(); }

  const std::vector<Point> &vertices() const { return vertices_; }
  const std::vector<std::vector<int>> &cells() const { return cells_; }
  std::span<const int> cell(int k) const { return cells_[k]; }

  const std::vector<InteriorEdge> &interior_edges() const { return interior_; }
  const std::vector<BoundaryEdge> &boundary_edges() const { return boundary_; }

  /// Edges of cell k in loop order.
  std::span<const CellEdge> cell_edges(int k) const { return cell_edges_[k]; }
  /// Edge-neighbours of cell k, ascending.
  std::span<const int> neighbors(int k) const { return neighbors_[k]; }

  const Point &barycenter(int k) const { return barycenters_[k]; }
  double diameter(int k) const { return diameters_[k]; }
  double area(int k) const { return areas_[k]; }
  std::span<const Triangle> subtriangles(int k) const { return subtriangles_[k]; }

  /// Global mesh size h = max h_K.
  double h() const { return h_; }
  double total_area() const;

  /// True if x lies in the closure of cell k, up to tol * h_K.
  bool contains(int k, const Point &x, double tol = 1e-12) const;

private:
  void build_edges();
  void build_geometry();

  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<InteriorEdge> interior_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::vector<CellEdge>> cell_edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<Point> barycenters_;
  std::vector<double> diameters_;
  std::vector<double> areas_;
  std::vector<std::vector<Triangle>> subtriangles_;
  double h_ = 0.0;
};

/// Shape-regularity summary of a mesh's sub-triangulation.
struct MeshQualityReport {
  int max_subtriangles_per_cell = 0;
  double max_aspect = 0.0; ///< max h_T / rho_T over all sub-triangles
  double min_edge_length = 0.0;
  double max_edge_length = 0.0;
};

/// Signed area of a closed polygon (positive when counter-clockwise).
double signed_area(std::span<const Point> polygon);

/// Ratio of the longest side to the inscribed-circle radius.
double triangle_aspect(const Triangle &t);

/// Reads gmsh MSH 2.2 ASCII. Line elements are ignored, triangles and
/// quadrangles become cells.
PolygonalMesh load_msh(std::istream &in);
PolygonalMesh load_msh_file(const std::string &path);

/// Writes the cells back as MSH 2.2 ASCII (triangles as type 2, quads as
/// type 3). Polygons with more than four vertices are rejected.
void write_msh(const PolygonalMesh &mesh, std::ostream &out);

/// Unit square split into n x n squares, each cut along the diagonal from
/// lower-left to upper-right.
PolygonalMesh generate_structured_triangular(int n);

/// Unit square split into n x n quadrilaterals.
PolygonalMesh generate_structured_quadrilateral(int n);

/// L-shaped domain [-1,1]^2 minus [0,1)x(-1,0], n squares per unit length,
/// each split into two triangles.
PolygonalMesh generate_lshape_triangular(int n);

/// Splits every triangle into four congruent children via edge midpoints.
PolygonalMesh refine_red(const PolygonalMesh &mesh);

MeshQualityReport mesh_quality(const PolygonalMesh &mesh);

} // namespace prfem
