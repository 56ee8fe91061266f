#pragma once

#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "prfem/mesh.hpp"
#include "prfem/reconstruction.hpp"

namespace prfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorField = std::function<Eigen::Vector2d(const Point &)>;
using ScalarField = std::function<double(const Point &)>;

enum class MeshKind { triangular, mixed };

/// triangular when every cell has three vertices.
MeshKind classify_mesh(const PolygonalMesh &mesh);

/// Default #S(K) per reconstruction degree (1..5); degree 0 maps to 1,
/// i.e. the piecewise constants.
int default_patch_target(int degree, MeshKind kind = MeshKind::triangular);

/// Velocity/pressure space pair V_h^k x Q_h^{k'} with patch sizes.
struct SpacePair {
  int k = 1;
  int k_p = 0;
  int target_u = 5;
  int target_p = 1;

  static SpacePair with_defaults(int k, int k_p, MeshKind kind = MeshKind::triangular);
};

/// Interior-penalty parameters. eta = mu / h_e on every edge.
struct DGConfig {
  double mu = 10.0;
  /// Quadrature exactness; negative values select the defaults
  /// 2k (cells), 2k+1 (edges) and 2k+4 (data terms).
  int volume_order = -1;
  int edge_order = -1;
  int load_order = -1;
};

/// Quadrature degrees actually used for a given velocity/pressure degree.
struct QuadratureOrders {
  int volume;
  int edge;
  int load;
};
QuadratureOrders quadrature_orders(const DGConfig &config, int k, int k_p = 0);

/**
 * Assembled mixed system. Velocity unknowns are ordered component-major:
 * index(cell, c) = c * n + cell with n = #cells. Pressure unknown = cell.
 */
struct StokesSystem {
  SparseMatrix A; ///< 2n x 2n, a(.,.)
  SparseMatrix B; ///< n x 2n, b(.,.)
  Eigen::VectorXd F;
  Eigen::VectorXd G;
  SparseMatrix S; ///< 2n x 2n, DG norm on the velocity space
  SparseMatrix T; ///< n x n, L2 norm on the pressure space
  Eigen::VectorXd pressure_integrals; ///< integral of each pressure basis function
  int num_cells = 0;

  int velocity_dof(int cell, int component) const { return component * num_cells + cell; }
};

SparseMatrix assemble_a(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u, const DGConfig &config);

SparseMatrix assemble_b(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                        const ReconstructionBasis &basis_p, const DGConfig &config = {});

struct LoadVectors {
  Eigen::VectorXd F;
  Eigen::VectorXd G;
  double compatibility = 0.0; ///< integral of g.n over the boundary
};

/// F realizes l(v), G realizes (q, g.n) on the boundary. Prints a warning
/// when |integral of g.n| > 1e-8.
LoadVectors assemble_loads(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                           const ReconstructionBasis &basis_p, const VectorField &f, const VectorField &g,
                           const DGConfig &config);

struct NormMatrices {
  SparseMatrix S;
  SparseMatrix T;
};

NormMatrices assemble_norm_matrices(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                                    const ReconstructionBasis &basis_p, const DGConfig &config = {});

Eigen::VectorXd basis_integrals(const PolygonalMesh &mesh, const ReconstructionBasis &basis, int order);

StokesSystem assemble_system(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                             const ReconstructionBasis &basis_p, const VectorField &f, const VectorField &g,
                             const DGConfig &config);

} // namespace prfem
