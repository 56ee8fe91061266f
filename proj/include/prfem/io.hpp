#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "prfem/analysis.hpp"

namespace prfem {

/// Fixed "%.6e" formatting shared by every CSV writer.
std::string format_number(double value);

/// "k:k_p"
std::string pair_label(const SpacePair &pair);

/// Legacy ASCII VTK unstructured grid. Each cell is written as its
/// sub-triangles with private copies of their vertices, so the piecewise
/// polynomial fields keep their discontinuities. Point data: "velocity"
/// (VECTORS, z = 0) and "pressure" (SCALARS).
void write_vtk(std::ostream &os, const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
               const ReconstructionBasis &basis_p, const StokesSolution &solution,
               const std::string &title = "prfem stokes solution");

/// h,dofs,l2_u,dg_u,l2_p
void write_errors_csv(std::ostream &os, const std::vector<ErrorReport> &reports);

/// errors columns followed by order_l2_u,order_dg_u,order_l2_p; the first
/// row carries empty order fields.
void write_convergence_csv(std::ostream &os, const ConvergenceStudy &study);

/// pair,h,mu_min,ratio,verdict; every row of a report carries the verdict of
/// its pair.
void write_infsup_csv(std::ostream &os, const std::vector<InfSupReport> &reports);

/// pair,dofs,l2_u,order
void write_lshape_csv(std::ostream &os, const SpacePair &pair, const std::vector<LShapeRow> &rows,
                      bool header = true);

} // namespace prfem
