#pragma once

#include <vector>

#include <Eigen/Core>

#include "prfem/assembly.hpp"

namespace prfem {

struct StokesSolution {
  Eigen::VectorXd U; ///< velocity coefficients, component-major
  Eigen::VectorXd P; ///< pressure coefficients, shifted to zero mean
  double residual_norm = 0.0; ///< of the augmented system, relative to max(|rhs|, 1)
  double multiplier = 0.0;    ///< Lagrange multiplier of the zero-mean constraint
};

/// Solves [[A, B^T, 0], [B, 0, m], [0, m^T, 0]] [U; P; s] = [F; G; 0] where
/// m holds the integrals of the pressure basis functions, so that the
/// constant pressure mode is removed.
///
/// The multiplier is eliminated first. The remaining system is solved by a
/// sparse LDL^T factorization of [[A, B^T], [B, -eps T]] with iterative
/// refinement; if that does not reach a relative residual of 1e-10 the full
/// augmented system is factorized by sparse LU. Throws SolverError when the
/// residual exceeds 1e-8.
StokesSolution solve_stokes(const StokesSystem &system);

inline constexpr int kMaxDenseInfSupDimension = 5000;

/// Dense pressure-side pencil (B S^+ B^T, T) with S^+ = (S + shift I)^{-1}.
struct PressurePencil {
  Eigen::MatrixXd M;
  Eigen::MatrixXd T;
  double shift = 0.0;
};

/// shift = 1e-10 * max_i S_ii.
PressurePencil build_pressure_pencil(const SparseMatrix &B, const SparseMatrix &S, const SparseMatrix &T);

struct InfSupResult {
  double mu_min = 0.0;
  int null_modes = 0;     ///< eigenvalues below 1e-8 * lambda_max
  double shift = 0.0;     ///< Tikhonov shift applied to S
  double lambda_max = 0.0;
  std::vector<double> smallest; ///< a few smallest retained eigenvalues mu^2
};

/// Inf-sup constant: square root of the smallest nonzero generalized
/// eigenvalue of the pressure pencil. Throws SolverError when the pressure
/// dimension exceeds kMaxDenseInfSupDimension or every eigenvalue is null.
InfSupResult infsup_mu_min(const StokesSystem &system);
InfSupResult infsup_mu_min(const SparseMatrix &B, const SparseMatrix &S, const SparseMatrix &T);

} // namespace prfem
