#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "prfem/assembly.hpp"
#include "prfem/mesh.hpp"
#include "prfem/reconstruction.hpp"
#include "prfem/solver.hpp"

namespace prfem {

using TensorField = std::function<Eigen::Matrix2d(const Point &)>;

/// Analytic Stokes solution with its data. grad_u(i, j) = du_i / dx_j.
struct ManufacturedSolution {
  VectorField u;
  TensorField grad_u;
  ScalarField p; ///< empty when no reference pressure is available
  VectorField f;
  VectorField g;
};

/// u = (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y), p = x^2 + y^2 on [0,1]^2.
ManufacturedSolution smooth_solution();

/// Smallest positive root of sin(lambda omega) + lambda sin(omega) = 0 with
/// omega = 3 pi / 2, by bisection on (0.1, 0.9).
double solve_lambda();

/// Corner-singular solution of the L-shaped domain; f = 0, g = u. The
/// reference pressure is attached only when `with_pressure` is set.
ManufacturedSolution lshape_solution(bool with_pressure = false);

/// Solenoidal polynomial velocity of degree k with a polynomial pressure
/// of degree k_p; reproduced exactly by a consistent discretization.
ManufacturedSolution polynomial_solution(int k, int k_p);

/// Boundary data and source of a Stokes run, with the exact solution when
/// one is known.
struct StokesProblem {
  std::string name;
  VectorField f;
  VectorField g;
  std::optional<ManufacturedSolution> exact;
  bool pressure_errors = true;
};

/// Lid-driven cavity: g = (1, 0) on the open top lid, zero elsewhere; f = 0.
StokesProblem cavity_case();
StokesProblem smooth_case();
StokesProblem lshape_case();
StokesProblem polynomial_case(int k, int k_p);
/// "smooth", "cavity" or "lshape".
StokesProblem make_problem(const std::string &name);

struct ErrorReport {
  double l2_velocity = 0.0;
  double dg_velocity = 0.0;
  double l2_pressure = 0.0; ///< NaN when not reported
  long dofs = 0;            ///< number of cells (one unknown per cell and field component)
  double h = 0.0;
};

/// Velocity and pressure spaces on one mesh. Holds a pointer to the mesh.
struct Discretization {
  SpacePair pair;
  ReconstructionBasis basis_u;
  ReconstructionBasis basis_p;
};

Discretization discretize(const PolygonalMesh &mesh, const SpacePair &pair);

/// L2 and DG velocity errors and the L2 pressure error after shifting both
/// pressures to zero mean. The exact velocity has no jumps; on boundary
/// edges the jump is u_h - u.
ErrorReport error_norms(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                        const ReconstructionBasis &basis_p, const StokesSolution &solution,
                        const ManufacturedSolution &exact, bool with_pressure = true, int order = -1);

/// Errors of the reconstruction of a scalar function from its barycenter
/// values. The DG error adds h_e^{-1}-weighted jumps, taken against g on
/// boundary edges.
struct InterpolationErrors {
  double l2 = 0.0;
  double dg = 0.0;
  double max = 0.0; ///< over the quadrature points
  double h = 0.0;
};

InterpolationErrors interpolation_errors(const PolygonalMesh &mesh, const ReconstructionBasis &basis,
                                         const ScalarField &g, const std::function<Eigen::Vector2d(const Point &)> &grad_g,
                                         int order = -1);

struct RunResult {
  StokesSystem system;
  StokesSolution solution;
  std::optional<ErrorReport> errors;
};

RunResult run_problem(const PolygonalMesh &mesh, const Discretization &disc, const StokesProblem &problem,
                      const DGConfig &config);

/// Least-squares slope of log(err) against log(h).
double loglog_slope(std::span<const double> h, std::span<const double> err);
/// log(e_{i-1}/e_i) / log(h_{i-1}/h_i) for i >= 1.
std::vector<double> pairwise_orders(std::span<const double> h, std::span<const double> err);

struct ConvergenceStudy {
  SpacePair pair;
  std::vector<ErrorReport> reports;
  double slope_l2_u = 0.0;
  double slope_dg_u = 0.0;
  double slope_l2_p = 0.0;
  std::vector<double> order_l2_u, order_dg_u, order_l2_p;
};

/// Runs the problem on every mesh. With threads > 1 independent meshes are
/// processed concurrently; reports are kept in input order either way.
ConvergenceStudy convergence_study(const StokesProblem &problem, const SpacePair &pair,
                                   const std::vector<PolygonalMesh> &meshes, const DGConfig &config,
                                   int threads = 1);

struct InfSupEntry {
  double h = 0.0;
  double mu_min = 0.0;
  double ratio = 0.0; ///< mu_min / previous mu_min; NaN for the first mesh
  int null_modes = 0;
};

struct InfSupReport {
  SpacePair pair;
  std::vector<InfSupEntry> entries;
  bool pass = false;
  std::string diagnostics;
};

inline constexpr double kInfSupMinRatio = 0.8;
inline constexpr double kInfSupMinValue = 0.01;

/// mu_min on each mesh. PASS when every successive ratio is >= 0.8 and the
/// final mu_min >= 0.01. A degenerate pair is reported as FAIL.
InfSupReport infsup_study(const SpacePair &pair, const std::vector<PolygonalMesh> &meshes,
                          const DGConfig &config, int threads = 1);

struct LShapeRow {
  long dofs = 0;
  double h = 0.0;
  double l2_error = 0.0;
  double order = 0.0; ///< NaN on the coarsest mesh
};

/// Velocity L2 errors on generate_lshape_triangular(base_n) and `levels`
/// red refinements of it.
std::vector<LShapeRow> lshape_study(const SpacePair &pair, int base_n, int levels, const DGConfig &config,
                                    int threads = 1);

} // namespace prfem
