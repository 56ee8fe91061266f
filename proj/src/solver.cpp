#include "prfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "prfem/error.hpp"

namespace prfem {

namespace {

void append(std::vector<Eigen::Triplet<double>> &t, const SparseMatrix &m, Eigen::Index r0, Eigen::Index c0,
            double scale = 1.0, bool transpose = false) {
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (transpose) {
        t.emplace_back(r0 + it.col(), c0 + it.row(), scale * it.value());
      } else {
        t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
      }
    }
}

// Residual of the augmented system at (U, P, s), relative to max(|rhs|, 1).
double augmented_residual(const StokesSystem &sys, const Eigen::VectorXd &U, const Eigen::VectorXd &P, double s) {
  const Eigen::VectorXd r1 = sys.F - sys.A * U - sys.B.transpose() * P;
  const Eigen::VectorXd r2 = sys.G - sys.B * U - s * sys.pressure_integrals;
  const double r3 = sys.pressure_integrals.dot(P);
  const double rhs = std::sqrt(sys.F.squaredNorm() + sys.G.squaredNorm());
  return std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3 * r3) / std::max(rhs, 1.0);
}

void shift_to_zero_mean(const StokesSystem &sys, Eigen::VectorXd &P) {
  P.array() -= sys.pressure_integrals.dot(P) / sys.pressure_integrals.sum();
}

// Symmetric factorization of the quasi-definite matrix [[A, B^T], [B, -eps T]]
// used as the approximate inverse in iterative refinement on [[A, B^T], [B, 0]].
// The multiplier is eliminated beforehand: since B^T 1 = 0 it equals
// 1^T G / 1^T m. Returns false when the refinement does not converge.
bool solve_quasidefinite(const StokesSystem &sys, StokesSolution &sol) {
  const Eigen::Index nv = sys.A.rows();
  const Eigen::Index np = sys.B.rows();
  const double a_scale = sys.A.diagonal().cwiseAbs().maxCoeff();
  const double t_scale = sys.T.diagonal().cwiseAbs().maxCoeff();
  if (!(a_scale > 0.0) || !(t_scale > 0.0) || sys.T.rows() != np) return false;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(sys.A.nonZeros() + 2 * sys.B.nonZeros() + sys.T.nonZeros()));
  append(t, sys.A, 0, 0);
  append(t, sys.B, nv, 0);
  append(t, sys.B, 0, nv, 1.0, true);
  SparseMatrix K(nv + np, nv + np);
  K.setFromTriplets(t.begin(), t.end());
  append(t, sys.T, nv, nv, -1e-12 * a_scale / t_scale);
  SparseMatrix Ke(nv + np, nv + np);
  Ke.setFromTriplets(t.begin(), t.end());

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(Ke);
  if (ldlt.info() != Eigen::Success) return false;

  const double s = sys.G.sum() / sys.pressure_integrals.sum();
  Eigen::VectorXd rhs(nv + np);
  rhs.head(nv) = sys.F;
  rhs.tail(np) = sys.G - s * sys.pressure_integrals;
  const double rhs_norm = std::max(rhs.norm(), 1.0);

  Eigen::VectorXd x = ldlt.solve(rhs);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 20 && x.allFinite(); ++it) {
    const Eigen::VectorXd r = rhs - K * x;
    const double res = r.norm() / rhs_norm;
    if (res < 1e-14 || res > 0.5 * prev) break;
    prev = res;
    x += ldlt.solve(r);
  }
  if (!x.allFinite()) return false;

  sol.U = x.head(nv);
  sol.P = x.tail(np);
  sol.multiplier = s;
  shift_to_zero_mean(sys, sol.P);
  sol.residual_norm = augmented_residual(sys, sol.U, sol.P, s);
  return sol.residual_norm <= 1e-10;
}

StokesSolution solve_augmented_lu(const StokesSystem &sys) {
  const Eigen::Index nv = sys.A.rows();
  const Eigen::Index np = sys.B.rows();
  const Eigen::Index n = nv + np + 1;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(sys.A.nonZeros() + 2 * sys.B.nonZeros() + 2 * np));
  append(t, sys.A, 0, 0);
  append(t, sys.B, nv, 0);
  append(t, sys.B, 0, nv, 1.0, true);
  for (Eigen::Index i = 0; i < np; ++i) {
    t.emplace_back(nv + i, n - 1, sys.pressure_integrals(i));
    t.emplace_back(n - 1, nv + i, sys.pressure_integrals(i));
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(nv) = sys.F;
  rhs.segment(nv, np) = sys.G;

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(K);
  lu.factorize(K);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "saddle-point factorization failed (" << n << " unknowns): " << lu.lastErrorMessage();
    throw SolverError(msg.str());
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw SolverError("saddle-point solve produced non-finite values");

  StokesSolution sol;
  sol.U = x.head(nv);
  sol.P = x.segment(nv, np);
  sol.multiplier = x(n - 1);
  shift_to_zero_mean(sys, sol.P);
  sol.residual_norm = augmented_residual(sys, sol.U, sol.P, sol.multiplier);
  return sol;
}

} // namespace

StokesSolution solve_stokes(const StokesSystem &system) {
  const Eigen::Index nv = system.A.rows();
  const Eigen::Index np = system.B.rows();
  if (system.A.cols() != nv || system.B.cols() != nv || system.F.size() != nv || system.G.size() != np ||
      system.pressure_integrals.size() != np)
    throw SolverError("solve_stokes: inconsistent system dimensions");
  if (!(system.pressure_integrals.sum() > 0.0)) throw SolverError("solve_stokes: pressure basis has zero total mass");

  StokesSolution sol;
  if (solve_quasidefinite(system, sol)) return sol;
  sol = solve_augmented_lu(system);
  if (!(sol.residual_norm <= 1e-8)) {
    std::ostringstream msg;
    msg << "saddle-point solve did not reach the residual tolerance (relative residual " << sol.residual_norm << ")";
    throw SolverError(msg.str());
  }
  return sol;
}

PressurePencil build_pressure_pencil(const SparseMatrix &B, const SparseMatrix &S, const SparseMatrix &T) {
  const Eigen::Index np = B.rows();
  const Eigen::Index nv = B.cols();
  if (S.rows() != nv || S.cols() != nv || T.rows() != np || T.cols() != np)
    throw SolverError("inf-sup: inconsistent matrix dimensions");
  if (np > kMaxDenseInfSupDimension) {
    throw SolverError("inf-sup: pressure dimension " + std::to_string(np) + " exceeds the dense limit of " +
                      std::to_string(kMaxDenseInfSupDimension));
  }

  PressurePencil p;
  p.shift = 1e-10 * S.diagonal().cwiseAbs().maxCoeff();
  SparseMatrix shifted = S;
  for (Eigen::Index i = 0; i < nv; ++i) shifted.coeffRef(i, i) += p.shift;

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverError("inf-sup: factorization of the DG norm matrix failed");

  const SparseMatrix Bt = B.transpose();
  p.M.resize(np, np);
  constexpr Eigen::Index block = 256;
  for (Eigen::Index c0 = 0; c0 < np; c0 += block) {
    const Eigen::Index w = std::min(block, np - c0);
    const Eigen::MatrixXd rhs = Bt.middleCols(c0, w);
    const Eigen::MatrixXd x = ldlt.solve(rhs);
    p.M.middleCols(c0, w) = B * x;
  }
  p.M = 0.5 * (p.M + p.M.transpose()).eval();
  p.T = Eigen::MatrixXd(T);
  return p;
}

InfSupResult infsup_mu_min(const SparseMatrix &B, const SparseMatrix &S, const SparseMatrix &T) {
  PressurePencil p = build_pressure_pencil(B, S, T);

  Eigen::VectorXd eig;
  bool diagonal_t = p.T.diagonal().minCoeff() > 0.0;
  for (int c = 0; c < T.outerSize() && diagonal_t; ++c)
    for (SparseMatrix::InnerIterator it(T, c); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) diagonal_t = false;
  if (diagonal_t) {
    const Eigen::VectorXd d = p.T.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = d.asDiagonal() * p.M * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("inf-sup: eigenvalue iteration did not converge");
    eig = es.eigenvalues();
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(p.M, p.T, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
      throw SolverError("inf-sup: generalized eigenproblem failed (is T positive definite?)");
    eig = es.eigenvalues();
  }

  InfSupResult r;
  r.shift = p.shift;
  r.lambda_max = eig.maxCoeff();
  const double cutoff = 1e-8 * r.lambda_max;
  Eigen::Index first = -1;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig(i) < cutoff) {
      ++r.null_modes;
    } else if (first < 0) {
      first = i;
    }
  }
  if (first < 0 || !(r.lambda_max > 0.0))
    throw SolverError("inf-sup: degenerate pair, every eigenvalue of the pressure pencil is null");
  r.mu_min = std::sqrt(eig(first));
  for (Eigen::Index i = first; i < eig.size() && r.smallest.size() < 5; ++i) r.smallest.push_back(eig(i));
  return r;
}

InfSupResult infsup_mu_min(const StokesSystem &system) { return infsup_mu_min(system.B, system.S, system.T); }

} // namespace prfem
