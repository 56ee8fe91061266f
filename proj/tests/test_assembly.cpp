#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "oracle.hpp"
#include "prfem/analysis.hpp"
#include "prfem/assembly.hpp"
#include "prfem/error.hpp"

using namespace prfem;

namespace {

Eigen::MatrixXd dense(const SparseMatrix &m) { return Eigen::MatrixXd(m); }

double max_abs(const Eigen::MatrixXd &m) { return m.cwiseAbs().maxCoeff(); }

// Smallest and largest eigenvalues of the pencil (X, S) with S SPD.
Eigen::VectorXd pencil_eigs(const Eigen::MatrixXd &X, const Eigen::MatrixXd &S) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(X, S, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues();
}

// The spaces keep a pointer to the mesh, so the pair lives together.
struct Fixture {
  PolygonalMesh mesh;
  Discretization disc;
  Fixture(PolygonalMesh m, int k, int kp)
      : mesh(std::move(m)), disc(discretize(mesh, SpacePair::with_defaults(k, kp, classify_mesh(mesh)))) {}
  Fixture(const Fixture &) = delete;
};

} // namespace

TEST(Assembly, DimensionsAndSymmetry) {
  Fixture f(generate_structured_triangular(4), 2, 1);
  DGConfig cfg;
  auto A = dense(assemble_a(f.mesh, f.disc.basis_u, cfg));
  auto B = dense(assemble_b(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg));
  auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg);
  const long n = static_cast<long>(f.mesh.num_cells());
  EXPECT_EQ(A.rows(), 2 * n);
  EXPECT_EQ(A.cols(), 2 * n);
  EXPECT_EQ(B.rows(), n);
  EXPECT_EQ(B.cols(), 2 * n);
  EXPECT_LE(max_abs(A - A.transpose()), 1e-12 * max_abs(A));
  auto S = dense(nm.S), T = dense(nm.T);
  EXPECT_LE(max_abs(S - S.transpose()), 1e-12 * max_abs(S));
  EXPECT_LE(max_abs(T - T.transpose()), 1e-12 * max_abs(T));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().minCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues().minCoeff(), 0.0);
}

TEST(Assembly, RejectsNonPositivePenalty) {
  Fixture f(generate_structured_triangular(2), 1, 0);
  EXPECT_THROW(assemble_a(f.mesh, f.disc.basis_u, DGConfig{0.0}), DomainError);
  EXPECT_THROW(assemble_a(f.mesh, f.disc.basis_u, DGConfig{-1.0}), DomainError);
}

// A constant field has no gradient and no interior jumps; only the boundary
// penalty survives: v'Av = mu * sum_e |e| / h_e and v'Sv = sum_e |e| / h_e.
TEST(Assembly, ConstantVelocitySeesOnlyBoundaryPenalty) {
  for (const auto &m : {generate_structured_triangular(5), generate_lshape_triangular(2)}) {
    Fixture f(m, 2, 1);
    DGConfig cfg{7.0};
    auto A = assemble_a(f.mesh, f.disc.basis_u, cfg);
    auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg);
    const long n = static_cast<long>(f.mesh.num_cells());
    double edges = 0.0;
    for (const auto &e : f.mesh.boundary_edges()) edges += e.length / e.length;
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * n);
      v.segment(c * n, n).setOnes();
      EXPECT_NEAR(v.dot(A * v), 7.0 * edges, 1e-10 * edges);
      EXPECT_NEAR(v.dot(nm.S * v), edges, 1e-10 * edges);
      // The interior part vanishes: the rows of a constant hit only boundary cells.
      Eigen::VectorXd Av = A * v;
      for (long k = 0; k < n; ++k) {
        bool near_boundary = false;
        for (int j : f.disc.basis_u.support(static_cast<int>(k)))
          for (const auto &ce : f.mesh.cell_edges(j)) near_boundary |= ce.boundary;
        if (!near_boundary) {
          EXPECT_NEAR(Av(c * n + k), 0.0, 1e-10);
        }
      }
    }
  }
}

TEST(Assembly, DivergenceOfAnyFieldAgainstConstantPressureVanishes) {
  for (auto [k, kp] : {std::pair{1, 0}, {2, 1}, {2, 2}}) {
    Fixture f(generate_lshape_triangular(3), k, kp);
    auto B = assemble_b(f.mesh, f.disc.basis_u, f.disc.basis_p);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(B.rows());
    Eigen::VectorXd r = B.transpose() * ones;
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-10) << k << ":" << kp;
  }
}

TEST(Assembly, PressureMassMatrix) {
  Fixture f(generate_structured_triangular(6), 2, 2);
  auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(nm.T.rows());
  EXPECT_NEAR(ones.dot(nm.T * ones), 1.0, 1e-12);
  // Partition of unity: integrals of the pressure basis are the row sums of T.
  Eigen::VectorXd integrals = basis_integrals(f.mesh, f.disc.basis_p, 8);
  EXPECT_LT((integrals - nm.T * ones).cwiseAbs().maxCoeff(), 1e-13);

  Fixture f0(generate_structured_quadrilateral(3), 1, 0);
  auto T0 = dense(assemble_norm_matrices(f0.mesh, f0.disc.basis_u, f0.disc.basis_p).T);
  for (int i = 0; i < T0.rows(); ++i)
    for (int j = 0; j < T0.cols(); ++j) EXPECT_NEAR(T0(i, j), i == j ? f0.mesh.area(i) : 0.0, 1e-15);
}

TEST(Assembly, ZeroDataGivesZeroLoads) {
  Fixture f(generate_structured_triangular(3), 2, 1);
  auto zero = [](const Point &) { return Eigen::Vector2d::Zero().eval(); };
  auto l = assemble_loads(f.mesh, f.disc.basis_u, f.disc.basis_p, zero, zero, DGConfig{});
  EXPECT_EQ(l.F.norm(), 0.0);
  EXPECT_EQ(l.G.norm(), 0.0);
  EXPECT_EQ(l.compatibility, 0.0);
}

TEST(Assembly, CavityPressureLoadIsZero) {
  Fixture f(generate_structured_triangular(8), 3, 2);
  auto c = cavity_case();
  auto l = assemble_loads(f.mesh, f.disc.basis_u, f.disc.basis_p, c.f, c.g, DGConfig{});
  EXPECT_EQ(l.G.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(l.F.norm(), 0.0);
}

TEST(Assembly, SmoothDataIsCompatible) {
  Fixture f(generate_structured_triangular(10), 2, 1);
  auto s = smooth_case();
  auto l = assemble_loads(f.mesh, f.disc.basis_u, f.disc.basis_p, s.f, s.g, DGConfig{});
  EXPECT_LE(std::abs(l.compatibility), 1e-10);
  EXPECT_LE(std::abs(l.G.sum()), 1e-10);
  // Independent trace integral of g.n along the four sides.
  double oracle = 0.0;
  const auto &r = edge_rule(15);
  const Point corners[] = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  const Point normals[] = {Point(0, -1), Point(1, 0), Point(0, 1), Point(-1, 0)};
  for (int side = 0; side < 4; ++side)
    for (std::size_t q = 0; q < r.size(); ++q) {
      const Point x = corners[side] + r.points[q].x() * (corners[(side + 1) % 4] - corners[side]);
      oracle += r.weights[q] * s.g(x).dot(normals[side]);
    }
  EXPECT_NEAR(l.compatibility, oracle, 1e-12);
}

TEST(Assembly, MatchesBruteForceAssembly) {
  for (auto [k, kp] : {std::pair{1, 0}, {2, 1}, {2, 2}, {3, 2}}) {
    // Eight cells are too few for a cubic patch.
    Fixture f(generate_structured_triangular(k == 3 ? 4 : 2), k, kp);
    DGConfig cfg{3.5};
    const int order = quadrature_orders(cfg, k, kp).volume + 2;
    auto ref = oracle::assemble(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg.mu, order);
    auto A = dense(assemble_a(f.mesh, f.disc.basis_u, cfg));
    auto B = dense(assemble_b(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg));
    auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg);
    EXPECT_LT(max_abs(A - ref.A), 1e-10) << k << ":" << kp;
    EXPECT_LT(max_abs(B - ref.B), 1e-10) << k << ":" << kp;
    EXPECT_LT(max_abs(dense(nm.S) - ref.S), 1e-10) << k << ":" << kp;
    EXPECT_LT(max_abs(dense(nm.T) - ref.T), 1e-10) << k << ":" << kp;
  }
}

TEST(Assembly, MatchesBruteForceOnMixedMesh) {
  Fixture f(generate_structured_quadrilateral(3), 2, 1);
  DGConfig cfg;
  auto ref = oracle::assemble(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg.mu, 6);
  EXPECT_LT(max_abs(dense(assemble_a(f.mesh, f.disc.basis_u, cfg)) - ref.A), 1e-10);
  EXPECT_LT(max_abs(dense(assemble_b(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg)) - ref.B), 1e-10);
}

TEST(Assembly, RandomFieldNormMatchesDirectQuadrature) {
  Fixture f(generate_structured_triangular(3), 2, 1);
  auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p);
  const int n = static_cast<int>(f.mesh.num_cells());
  Eigen::VectorXd v = Eigen::VectorXd::Random(2 * n);
  // Evaluate the DG norm of the reconstructed field directly.
  std::vector<ReconstructedField> comp;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> vals(v.data() + c * n, v.data() + (c + 1) * n);
    comp.push_back(reconstruct(f.disc.basis_u, vals));
  }
  double norm2 = 0.0;
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < 2; ++c)
      norm2 += integrate_cell(f.mesh, k, [&](const Point &x) { return comp[c].gradient(k, x).squaredNorm(); }, 6);
  for (int i = 0; i < static_cast<int>(f.mesh.interior_edges().size()); ++i) {
    const auto &e = f.mesh.interior_edges()[i];
    for (int c = 0; c < 2; ++c)
      norm2 += integrate_edge(f.mesh, {false, i}, [&](const Point &x) {
                 const double j = comp[c].value(e.left, x) - comp[c].value(e.right, x);
                 return j * j;
               }, 6) / e.length;
  }
  for (int i = 0; i < static_cast<int>(f.mesh.boundary_edges().size()); ++i) {
    const auto &e = f.mesh.boundary_edges()[i];
    for (int c = 0; c < 2; ++c)
      norm2 += integrate_edge(f.mesh, {true, i}, [&](const Point &x) {
                 const double j = comp[c].value(e.owner, x);
                 return j * j;
               }, 6) / e.length;
  }
  EXPECT_NEAR(v.dot(nm.S * v), norm2, 1e-10 * norm2);
}

TEST(Assembly, CoercivityWithScaledPenalty) {
  auto m = generate_structured_triangular(4);
  for (int k = 1; k <= 3; ++k) {
    Fixture f(m, k, k - 1);
    DGConfig cfg{10.0 * k * k};
    auto A = dense(assemble_a(f.mesh, f.disc.basis_u, cfg));
    auto S = dense(assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg).S);
    EXPECT_GE(pencil_eigs(A, S).minCoeff(), 0.05) << "k=" << k;
  }
}

TEST(Assembly, CoercivityWithDefaultPenalty) {
  auto m = generate_structured_triangular(4);
  for (int k = 1; k <= 3; ++k) {
    Fixture f(m, k, k - 1);
    DGConfig cfg;
    auto A = dense(assemble_a(f.mesh, f.disc.basis_u, cfg));
    auto S = dense(assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg).S);
    EXPECT_GE(pencil_eigs(A, S).minCoeff(), 0.05) << "k=" << k;
    if (k == 1) {
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(Assembly, ContinuityConstantsStayBounded) {
  double prev_a = 0.0, prev_b = 0.0;
  for (int n : {4, 8, 16}) {
    Fixture f(generate_structured_triangular(n), 2, 1);
    DGConfig cfg;
    auto A = dense(assemble_a(f.mesh, f.disc.basis_u, cfg));
    auto B = dense(assemble_b(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg));
    auto nm = assemble_norm_matrices(f.mesh, f.disc.basis_u, f.disc.basis_p, cfg);
    auto S = dense(nm.S), T = dense(nm.T);
    // |a(u,v)| <= C |u| |v| with C the largest |eigenvalue| of (A, S).
    const Eigen::VectorXd ea = pencil_eigs(A, S);
    const double ca = std::max(std::abs(ea.minCoeff()), std::abs(ea.maxCoeff()));
    // |b(v,q)| <= C |v| |q| with C^2 the largest eigenvalue of (B S^-1 B^T, T).
    const Eigen::MatrixXd M = B * S.llt().solve(B.transpose());
    const double cb = std::sqrt(pencil_eigs(0.5 * (M + M.transpose()), T).maxCoeff());
    if (prev_a > 0) {
      EXPECT_LE(ca, 1.5 * prev_a) << "n=" << n;
      EXPECT_LE(cb, 1.5 * prev_b) << "n=" << n;
    }
    prev_a = ca;
    prev_b = cb;
  }
}

TEST(Assembly, CouplingsPerRowAreMeshIndependent) {
  long prev = 0;
  for (int n : {6, 12, 24}) {
    Fixture f(generate_structured_triangular(n), 2, 1);
    auto A = assemble_a(f.mesh, f.disc.basis_u, DGConfig{});
    long worst = 0;
    for (int c = 0; c < A.outerSize(); ++c) {
      long nnz = 0;
      for (SparseMatrix::InnerIterator it(A, c); it; ++it) ++nnz;
      worst = std::max(worst, nnz);
    }
    EXPECT_LE(worst, 20L * f.disc.pair.target_u);
    if (n == 24) {
      EXPECT_LE(worst, prev);
    }
    prev = worst;
  }
}

TEST(Assembly, QuadratureOrderDefaults) {
  auto q = quadrature_orders(DGConfig{}, 3, 2);
  EXPECT_EQ(q.volume, 6);
  EXPECT_EQ(q.edge, 7);
  EXPECT_EQ(q.load, 10);
  DGConfig over;
  over.volume_order = 9;
  EXPECT_EQ(quadrature_orders(over, 1).volume, 9);
}
