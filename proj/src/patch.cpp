#include "prfem/patch.hpp"

#include <algorithm>

#include <Eigen/SVD>

#include "prfem/error.hpp"
#include "prfem/polynomial.hpp"

namespace prfem {

ElementPatch build_patch(const PolygonalMesh &mesh, int cell, int target) {
  if (target < 1) throw DomainError("build_patch: target must be >= 1");
  const Point &center = mesh.barycenter(cell);
  const std::size_t want = static_cast<std::size_t>(target);

  ElementPatch patch;
  patch.owner = cell;
  patch.members.push_back(cell);
  std::vector<char> taken(mesh.num_cells(), 0);
  taken[cell] = 1;

  std::vector<int> layer{cell};
  while (patch.members.size() < want) {
    std::vector<int> next;
    for (int c : layer) {
      for (int nb : mesh.neighbors(c)) {
        if (!taken[nb]) {
          taken[nb] = 1;
          next.push_back(nb);
        }
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end(), [&](int a, int b) {
      const double da = (mesh.barycenter(a) - center).squaredNorm();
      const double db = (mesh.barycenter(b) - center).squaredNorm();
      return da != db ? da < db : a < b;
    });
    const std::size_t room = want - patch.members.size();
    if (next.size() > room) next.resize(room);
    patch.members.insert(patch.members.end(), next.begin(), next.end());
    layer = std::move(next);
  }

  patch.collocation_points.reserve(patch.members.size());
  for (int m : patch.members) patch.collocation_points.push_back(mesh.barycenter(m));
  return patch;
}

std::vector<ElementPatch> build_patches(const PolygonalMesh &mesh, int target) {
  std::vector<ElementPatch> out(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k)
    out[k] = build_patch(mesh, static_cast<int>(k), target);
  return out;
}

UnisolvenceDiagnostic check_unisolvence(const ElementPatch &patch, int degree,
                                        std::optional<double> scale) {
  if (degree < 0) throw DomainError("check_unisolvence: degree must be >= 0");
  const PolynomialSpec spec{degree, patch.collocation_points.front(), 1.0};
  const std::size_t dim = static_cast<std::size_t>(spec.dimension());
  if (patch.cardinality() < dim) return {false, 0.0};

  double s = scale.value_or(0.0);
  if (!scale) {
    for (const auto &p : patch.collocation_points) s = std::max(s, (p - spec.center).norm());
    if (s == 0.0) s = 1.0;
  }
  const PolynomialSpec scaled{degree, spec.center, s};
  const Eigen::MatrixXd a = collocation_matrix(scaled, patch.collocation_points);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto &sv = svd.singularValues();
  const double ratio = sv(sv.size() - 1) / sv(0);
  return {ratio > 1e-10, ratio};
}

} // namespace prfem
