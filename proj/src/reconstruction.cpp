#include "prfem/reconstruction.hpp"

#include <algorithm>
#include <random>

#include <Eigen/QR>

#include "prfem/error.hpp"

namespace prfem {

ReconstructionBasis::ReconstructionBasis(const PolygonalMesh &mesh, int degree,
                                         std::vector<CellReconstruction> cells)
    : mesh_(&mesh), degree_(degree), cells_(std::move(cells)) {
  if (cells_.size() != mesh.num_cells())
    throw DomainError("ReconstructionBasis: one reconstruction per cell required");
  support_.assign(cells_.size(), {});
  for (std::size_t k = 0; k < cells_.size(); ++k)
    for (int j : cells_[k].members) support_[j].push_back(static_cast<int>(k));
}

ReconstructionBasis ReconstructionBasis::piecewise_constant(const PolygonalMesh &mesh) {
  std::vector<CellReconstruction> cells(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const int c = static_cast<int>(k);
    cells[k].spec = PolynomialSpec{0, mesh.barycenter(c), mesh.diameter(c)};
    cells[k].members = {c};
    cells[k].coefficients = Eigen::MatrixXd::Ones(1, 1);
  }
  return ReconstructionBasis(mesh, 0, std::move(cells));
}

Eigen::MatrixXd ReconstructionBasis::values(int k, std::span<const Point> points) const {
  const auto &c = cells_[k];
  return collocation_matrix(c.spec, points) * c.coefficients;
}

void ReconstructionBasis::gradients(int k, std::span<const Point> points, Eigen::MatrixXd &dx,
                                    Eigen::MatrixXd &dy) const {
  const auto &c = cells_[k];
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd gx(n, c.spec.dimension()), gy(n, c.spec.dimension());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = c.spec.gradients(points[i]);
    gx.row(i) = g.row(0);
    gy.row(i) = g.row(1);
  }
  dx = gx * c.coefficients;
  dy = gy * c.coefficients;
}

std::size_t ReconstructionBasis::nonzeros() const {
  std::size_t n = 0;
  for (const auto &c : cells_) n += c.members.size();
  return n;
}

namespace {

CellReconstruction fit_cell(const PolygonalMesh &mesh, const ElementPatch &patch, int degree) {
  CellReconstruction c;
  c.spec = PolynomialSpec{degree, mesh.barycenter(patch.owner), mesh.diameter(patch.owner)};
  c.members = patch.members;
  const Eigen::MatrixXd a = collocation_matrix(c.spec, patch.collocation_points);
  const auto n = static_cast<Eigen::Index>(patch.cardinality());
  c.coefficients = a.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  return c;
}

} // namespace

ReconstructionBasis build_basis(const PolygonalMesh &mesh, const std::vector<ElementPatch> &patches,
                                int degree, const BasisOptions &options) {
  if (degree < 0 || degree > kMaxReconstructionDegree)
    throw DomainError("build_basis: unsupported degree " + std::to_string(degree));
  if (patches.size() != mesh.num_cells()) throw DomainError("build_basis: one patch per cell required");

  std::vector<CellReconstruction> cells(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const int cell = static_cast<int>(k);
    ElementPatch patch = patches[k];
    auto diag = check_unisolvence(patch, degree, mesh.diameter(cell));
    for (int attempt = 0; !diag.ok && attempt < options.max_retries; ++attempt) {
      const int t = static_cast<int>(patch.cardinality());
      const int grown = t + (t + 1) / 2;
      patch = build_patch(mesh, cell, grown);
      diag = check_unisolvence(patch, degree, mesh.diameter(cell));
    }
    if (!diag.ok) {
      throw UnisolvenceError(cell, "least-squares reconstruction of degree " + std::to_string(degree) +
                                       " is not unisolvent on the patch of cell " + std::to_string(cell) +
                                       " (#S(K) = " + std::to_string(patch.cardinality()) + ")");
    }
    cells[k] = fit_cell(mesh, patch, degree);
  }
  return ReconstructionBasis(mesh, degree, std::move(cells));
}

ReconstructionBasis build_space(const PolygonalMesh &mesh, int degree, int target) {
  if (degree == 0 && target == 1) return ReconstructionBasis::piecewise_constant(mesh);
  return build_basis(mesh, build_patches(mesh, target), degree);
}

BasisEvaluation evaluate_basis(const ReconstructionBasis &basis, int cell, const Point &x) {
  if (!basis.mesh().contains(cell, x))
    throw DomainError("evaluate_basis: point outside cell " + std::to_string(cell));
  const auto &c = basis.cell(cell);
  BasisEvaluation e;
  e.functions = c.members;
  e.values = c.coefficients.transpose() * c.spec.values(x);
  e.gradients = c.spec.gradients(x) * c.coefficients;
  return e;
}

double ReconstructedField::value(int cell, const Point &x) const {
  return basis_->cell(cell).spec.values(x).dot(coefficients_[cell]);
}

Point ReconstructedField::gradient(int cell, const Point &x) const {
  return basis_->cell(cell).spec.gradients(x) * coefficients_[cell];
}

ReconstructedField reconstruct(const ReconstructionBasis &basis, std::span<const double> nodal_values) {
  if (nodal_values.size() != basis.size())
    throw DomainError("reconstruct: expected " + std::to_string(basis.size()) + " nodal values, got " +
                      std::to_string(nodal_values.size()));
  std::vector<Eigen::VectorXd> coeffs(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto &c = basis.cell(static_cast<int>(k));
    Eigen::VectorXd local(static_cast<Eigen::Index>(c.members.size()));
    for (std::size_t j = 0; j < c.members.size(); ++j) local(static_cast<Eigen::Index>(j)) = nodal_values[c.members[j]];
    coeffs[k] = c.coefficients * local;
  }
  return ReconstructedField(basis, std::move(coeffs));
}

double estimate_lambda(const PolygonalMesh &mesh, const ElementPatch &patch, int degree, int samples,
                       std::uint64_t seed) {
  const PolynomialSpec spec{degree, mesh.barycenter(patch.owner), mesh.diameter(patch.owner)};

  std::vector<Point> sample_points = patch.collocation_points;
  for (int m : patch.members) {
    for (const auto &t : mesh.subtriangles(m)) {
      sample_points.insert(sample_points.end(), t.begin(), t.end());
      sample_points.push_back((t[0] + t[1] + t[2]) / 3.0);
    }
  }
  const Eigen::MatrixXd at_samples = collocation_matrix(spec, sample_points);
  const Eigen::MatrixXd at_nodes = collocation_matrix(spec, patch.collocation_points);

  double best = 1.0;
  auto consider = [&](const Eigen::VectorXd &c) {
    const double den = (at_nodes * c).cwiseAbs().maxCoeff();
    if (den <= 0.0) return;
    best = std::max(best, (at_samples * c).cwiseAbs().maxCoeff() / den);
  };

  // Discrete least-squares cardinal functions of the patch.
  const auto n = static_cast<Eigen::Index>(patch.cardinality());
  const Eigen::MatrixXd cardinal = at_nodes.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  for (Eigen::Index j = 0; j < cardinal.cols(); ++j) consider(cardinal.col(j));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(spec.dimension());
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
    consider(c);
  }
  return best;
}

} // namespace prfem
