#pragma once

#include <optional>
#include <vector>

#include "prfem/mesh.hpp"

namespace prfem {

/// The element patch S(K) of a cell and its collocation points (the
/// barycenters of the members). `members.front()` is the owner.
struct ElementPatch {
  int owner = -1;
  std::vector<int> members;
  std::vector<Point> collocation_points;

  std::size_t cardinality() const { return members.size(); }
};

/// Result of the unisolvence check on a patch.
struct UnisolvenceDiagnostic {
  bool ok = false;
  double condition = 0.0; ///< sigma_min / sigma_max of the scaled collocation matrix
};

/// Grows the patch of `cell` by whole layers of edge-neighbours until it
/// holds at least `target` cells, then keeps the closest cells of the last
/// layer (by barycenter distance, ties by index) so that the cardinality is
/// exactly `target`. A mesh smaller than `target` yields the whole mesh.
ElementPatch build_patch(const PolygonalMesh &mesh, int cell, int target);

std::vector<ElementPatch> build_patches(const PolygonalMesh &mesh, int target);

/// Checks that the least-squares fit of degree `degree` is unique on the
/// patch collocation points. Monomials are centred at the owner's
/// collocation point and divided by `scale` (default: the largest distance
/// from the centre to another collocation point).
UnisolvenceDiagnostic check_unisolvence(const ElementPatch &patch, int degree,
                                        std::optional<double> scale = std::nullopt);

} // namespace prfem
