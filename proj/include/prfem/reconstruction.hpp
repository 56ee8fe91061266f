#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "prfem/mesh.hpp"
#include "prfem/patch.hpp"
#include "prfem/polynomial.hpp"

namespace prfem {

inline constexpr int kMaxReconstructionDegree = 6;

/// Least-squares reconstruction data of one cell K.
///
/// `coefficients` is the dimension x #S(K) matrix mapping the values at the
/// collocation points of S(K) (in `members` order) to the coefficients of
/// the local polynomial in the scaled monomials of `spec`. Column j is the
/// restriction of the basis function of cell members[j] to K.
struct CellReconstruction {
  PolynomialSpec spec;
  std::vector<int> members;
  Eigen::MatrixXd coefficients;
};

/**
 * Basis of the reconstructed space V_h^m = R^m U_h: one function per cell.
 *
 * On cell K the only basis functions that do not vanish are those of the
 * members of S(K). The support of the basis function of cell J is the
 * inverse relation {K : J in S(K)}, available through support().
 *
 * The basis keeps a pointer to the mesh; the mesh must outlive it.
 */
class ReconstructionBasis {
public:
  ReconstructionBasis() = default;
  ReconstructionBasis(const PolygonalMesh &mesh, int degree, std::vector<CellReconstruction> cells);

  /// Indicator functions of the cells (degree 0, S(K) = {K}).
  static ReconstructionBasis piecewise_constant(const PolygonalMesh &mesh);

  const PolygonalMesh &mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  std::size_t size() const { return cells_.size(); }

  const CellReconstruction &cell(int k) const { return cells_[k]; }
  std::span<const int> members(int k) const { return cells_[k].members; }
  std::span<const int> support(int j) const { return support_[j]; }

  /// Values of the local basis functions of cell k at the given points:
  /// an (#points x #S(k)) matrix.
  Eigen::MatrixXd values(int k, std::span<const Point> points) const;
  /// Gradients at the given points: (#points x #S(k)) for d/dx and d/dy.
  void gradients(int k, std::span<const Point> points, Eigen::MatrixXd &dx, Eigen::MatrixXd &dy) const;

  /// Number of (cell, member) couplings; a measure of basis sparsity.
  std::size_t nonzeros() const;

private:
  const PolygonalMesh *mesh_ = nullptr;
  int degree_ = 0;
  std::vector<CellReconstruction> cells_;
  std::vector<std::vector<int>> support_;
};

/// Options for building a basis from patches.
struct BasisOptions {
  /// Patches failing the unisolvence check are regrown with
  /// target + ceil(target / 2), at most this many times.
  int max_retries = 3;
};

/// Builds the basis of V_h^m. Each C_K is the pseudo-inverse of the scaled
/// collocation matrix of S(K), computed by a column-pivoted QR. Throws
/// UnisolvenceError naming the cell when retries are exhausted.
ReconstructionBasis build_basis(const PolygonalMesh &mesh, const std::vector<ElementPatch> &patches,
                                int degree, const BasisOptions &options = {});

/// Patches of size `target` followed by build_basis. Degree 0 with
/// target 1 gives the piecewise constants.
ReconstructionBasis build_space(const PolygonalMesh &mesh, int degree, int target);

struct BasisEvaluation {
  std::span<const int> functions; ///< cells whose basis functions are nonzero here
  Eigen::VectorXd values;
  Eigen::Matrix<double, 2, Eigen::Dynamic> gradients;
};

/// Evaluates every basis function that is nonzero on `cell` at x.
/// Throws DomainError when x is outside the closure of the cell.
BasisEvaluation evaluate_basis(const ReconstructionBasis &basis, int cell, const Point &x);

/// Piecewise polynomial R^m v for nodal values v (one per cell).
class ReconstructedField {
public:
  ReconstructedField(const ReconstructionBasis &basis, std::vector<Eigen::VectorXd> coefficients)
      : basis_(&basis), coefficients_(std::move(coefficients)) {}

  double value(int cell, const Point &x) const;
  Point gradient(int cell, const Point &x) const;
  /// Coefficients of the restriction to `cell` in its scaled monomials.
  const Eigen::VectorXd &local_coefficients(int cell) const { return coefficients_[cell]; }

private:
  const ReconstructionBasis *basis_;
  std::vector<Eigen::VectorXd> coefficients_;
};

ReconstructedField reconstruct(const ReconstructionBasis &basis, std::span<const double> nodal_values);

/// Lower bound of the patch stability constant
///   max_p  max_{x in S(K)} |p(x)| / max_{x in I_K} |p(x)|
/// over p in P_m, estimated from the patch's discrete least-squares
/// cardinal functions plus `samples` random polynomials. Sample points are
/// the vertices and barycenters of the sub-triangles of every patch cell.
double estimate_lambda(const PolygonalMesh &mesh, const ElementPatch &patch, int degree, int samples,
                       std::uint64_t seed = 20190101);

} // namespace prfem
