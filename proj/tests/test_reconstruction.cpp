#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "prfem/assembly.hpp"
#include "prfem/error.hpp"
#include "prfem/reconstruction.hpp"

using namespace prfem;

namespace {

// Points spread over a cell: sub-triangle corners pulled slightly inwards
// plus their centroids.
std::vector<Point> probe_points(const PolygonalMesh &m, int k) {
  std::vector<Point> out;
  for (const auto &t : m.subtriangles(k)) {
    const Point c = (t[0] + t[1] + t[2]) / 3.0;
    out.push_back(c);
    for (const auto &v : t) out.push_back(0.9 * v + 0.1 * c);
  }
  return out;
}

struct RandomPoly {
  int degree;
  std::vector<double> c;
  double operator()(const Point &x) const {
    double s = 0.0;
    int i = 0;
    for (int d = 0; d <= degree; ++d)
      for (int b = 0; b <= d; ++b) s += c[i++] * std::pow(x.x(), d - b) * std::pow(x.y(), b);
    return s;
  }
  Point grad(const Point &x) const {
    Point g = Point::Zero();
    int i = 0;
    for (int d = 0; d <= degree; ++d)
      for (int b = 0; b <= d; ++b, ++i) {
        const int a = d - b;
        if (a > 0) g.x() += c[i] * a * std::pow(x.x(), a - 1) * std::pow(x.y(), b);
        if (b > 0) g.y() += c[i] * b * std::pow(x.x(), a) * std::pow(x.y(), b - 1);
      }
    return g;
  }
};

RandomPoly random_poly(int degree, std::mt19937 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomPoly p{degree, {}};
  p.c.resize((degree + 1) * (degree + 2) / 2);
  for (auto &v : p.c) v = u(rng);
  return p;
}

std::vector<double> nodal(const PolygonalMesh &m, const std::function<double(const Point &)> &g) {
  std::vector<double> v(m.num_cells());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(m.barycenter(static_cast<int>(k)));
  return v;
}

} // namespace

TEST(Reconstruction, LinearFourCellPatchMatchesNormalEquations) {
  auto m = generate_structured_triangular(4);
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k) {
    if (m.neighbors(k).size() != 3) continue;
    auto basis = build_basis(m, build_patches(m, 4), 1);
    const auto members = basis.members(k);
    ASSERT_EQ(members.size(), 4u);
    Eigen::MatrixXd A(4, 3);
    for (int i = 0; i < 4; ++i) {
      const Point &b = m.barycenter(members[i]);
      A.row(i) << 1.0, b.x(), b.y();
    }
    const Eigen::MatrixXd C = (A.transpose() * A).inverse() * A.transpose();
    const auto pts = probe_points(m, k);
    const Eigen::MatrixXd got = basis.values(k, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Eigen::RowVector3d mono(1.0, pts[q].x(), pts[q].y());
      const Eigen::RowVectorXd oracle = mono * C;
      EXPECT_LT((got.row(static_cast<Eigen::Index>(q)) - oracle).cwiseAbs().maxCoeff(), 1e-12);
    }
    Eigen::MatrixXd dx, dy;
    basis.gradients(k, pts, dx, dy);
    EXPECT_LT((dx.row(0) - C.row(1)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((dy.row(0) - C.row(2)).cwiseAbs().maxCoeff(), 1e-10);
    return;
  }
  FAIL() << "no interior cell found";
}

TEST(Reconstruction, DegreeZeroIsPatchMean) {
  auto m = generate_lshape_triangular(2);
  auto basis = build_space(m, 0, 4);
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k) {
    const Point x = m.barycenter(k);
    auto v = basis.values(k, std::span<const Point>(&x, 1));
    for (Eigen::Index j = 0; j < v.cols(); ++j) EXPECT_NEAR(v(0, j), 0.25, 1e-14);
  }
}

TEST(Reconstruction, PiecewiseConstantIsIndicator) {
  auto m = generate_structured_quadrilateral(3);
  auto basis = build_space(m, 0, 1);
  EXPECT_EQ(basis.degree(), 0);
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k) {
    ASSERT_EQ(basis.members(k).size(), 1u);
    EXPECT_EQ(basis.members(k)[0], k);
    auto e = evaluate_basis(basis, k, m.barycenter(k));
    EXPECT_DOUBLE_EQ(e.values(0), 1.0);
    EXPECT_DOUBLE_EQ(e.gradients.norm(), 0.0);
  }
}

TEST(Reconstruction, ReproducesLinearFunction) {
  auto m = generate_structured_triangular(6);
  auto basis = build_space(m, 1, 5);
  auto g = [](const Point &x) { return 2.0 + 3.0 * x.x() - x.y(); };
  auto field = reconstruct(basis, nodal(m, g));
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k)
    for (const auto &x : probe_points(m, k)) {
      EXPECT_NEAR(field.value(k, x), g(x), 1e-12);
      EXPECT_LT((field.gradient(k, x) - Point(3.0, -1.0)).norm(), 1e-10);
    }
}

TEST(Reconstruction, ReproducesPolynomialsUpToDegree) {
  std::mt19937 rng(11);
  struct Case {
    PolygonalMesh mesh;
    MeshKind kind;
  };
  std::vector<Case> cases = {{generate_lshape_triangular(3), MeshKind::triangular},
                             {generate_structured_quadrilateral(6), MeshKind::mixed}};
  for (const auto &c : cases)
    for (int m = 0; m <= 3; ++m) {
      auto basis = build_space(c.mesh, m, m == 0 ? 1 : default_patch_target(m, c.kind));
      for (int trial = 0; trial < 3; ++trial) {
        auto p = random_poly(m, rng);
        auto field = reconstruct(basis, nodal(c.mesh, p));
        double err = 0.0, gerr = 0.0;
        for (int k = 0; k < static_cast<int>(c.mesh.num_cells()); ++k)
          for (const auto &x : probe_points(c.mesh, k)) {
            err = std::max(err, std::abs(field.value(k, x) - p(x)));
            gerr = std::max(gerr, (field.gradient(k, x) - p.grad(x)).norm());
          }
        EXPECT_LT(err, 1e-10) << "m=" << m;
        EXPECT_LT(gerr, 1e-8) << "m=" << m;
      }
    }
}

TEST(Reconstruction, PartitionOfUnity) {
  auto m = generate_lshape_triangular(3);
  for (int deg = 0; deg <= 4; ++deg) {
    auto basis = build_space(m, deg, deg == 0 ? 3 : default_patch_target(deg));
    for (int k = 0; k < static_cast<int>(m.num_cells()); k += 3) {
      const auto pts = probe_points(m, k);
      const Eigen::MatrixXd v = basis.values(k, pts);
      Eigen::MatrixXd dx, dy;
      basis.gradients(k, pts, dx, dy);
      for (Eigen::Index q = 0; q < v.rows(); ++q) {
        EXPECT_NEAR(v.row(q).sum(), 1.0, 1e-11) << "deg=" << deg;
        EXPECT_NEAR(dx.row(q).sum(), 0.0, 1e-8);
        EXPECT_NEAR(dy.row(q).sum(), 0.0, 1e-8);
      }
    }
  }
}

TEST(Reconstruction, SupportIsInverseOfMembers) {
  auto m = generate_lshape_triangular(3);
  auto basis = build_space(m, 2, 9);
  std::size_t total = 0;
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k) {
    total += basis.members(k).size();
    for (int j : basis.members(k)) {
      auto s = basis.support(j);
      EXPECT_NE(std::find(s.begin(), s.end(), k), s.end());
    }
  }
  std::size_t support_total = 0;
  for (int j = 0; j < static_cast<int>(m.num_cells()); ++j) {
    support_total += basis.support(j).size();
    for (int k : basis.support(j)) {
      auto mem = basis.members(k);
      EXPECT_NE(std::find(mem.begin(), mem.end(), j), mem.end());
    }
  }
  EXPECT_EQ(total, support_total);
  EXPECT_EQ(basis.nonzeros(), total);
}

TEST(Reconstruction, EvaluateBasisAgreesWithValues) {
  auto m = generate_structured_triangular(5);
  auto basis = build_space(m, 2, 9);
  const int k = 17;
  const Point x = m.barycenter(k) + Point(0.01, -0.005);
  ASSERT_TRUE(m.contains(k, x));
  auto e = evaluate_basis(basis, k, x);
  auto v = basis.values(k, std::span<const Point>(&x, 1));
  ASSERT_EQ(e.functions.size(), basis.members(k).size());
  for (Eigen::Index j = 0; j < v.cols(); ++j) EXPECT_NEAR(e.values(j), v(0, j), 1e-14);
  EXPECT_THROW(evaluate_basis(basis, k, Point(5.0, 5.0)), DomainError);
}

TEST(Reconstruction, NodalValueCountMismatch) {
  auto m = generate_structured_triangular(2);
  auto basis = build_space(m, 1, 5);
  std::vector<double> v(3, 0.0);
  EXPECT_THROW(reconstruct(basis, v), DomainError);
}

TEST(Reconstruction, UnisolvenceErrorNamesCell) {
  auto m = generate_structured_triangular(3);
  auto patches = build_patches(m, 2);
  try {
    build_basis(m, patches, 1, BasisOptions{0});
    FAIL() << "expected UnisolvenceError";
  } catch (const UnisolvenceError &e) {
    EXPECT_GE(e.cell(), 0);
    EXPECT_LT(e.cell(), static_cast<int>(m.num_cells()));
    EXPECT_NE(std::string(e.what()).find(std::to_string(e.cell())), std::string::npos);
  }
  auto basis = build_basis(m, patches, 1);
  for (int k = 0; k < static_cast<int>(m.num_cells()); ++k) EXPECT_GE(basis.members(k).size(), 3u);
}

TEST(Reconstruction, DegreeBeyondLimitRejected) {
  auto m = generate_structured_triangular(6);
  EXPECT_THROW(build_space(m, kMaxReconstructionDegree + 1, 60), DomainError);
}

// For linear polynomials the patch constant is a linear program in three
// unknowns: maximise p(y) over |p(x_i)| <= 1, with y ranging over the cell
// vertices (where a linear function attains its maximum). The optimum sits
// at a vertex of the feasible polytope, which we enumerate.
double linear_lambda_oracle(const PolygonalMesh &m, const ElementPatch &p) {
  const auto &xs = p.collocation_points;
  const int n = static_cast<int>(xs.size());
  std::vector<Point> ys;
  for (int c : p.members)
    for (int v : m.cell(c)) ys.push_back(m.vertices()[v]);
  const Point c0 = xs.front();
  auto row = [&](const Point &x) { return Eigen::RowVector3d(1.0, x.x() - c0.x(), x.y() - c0.y()); };
  double best = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        Eigen::Matrix3d M;
        M << row(xs[a]), row(xs[b]), row(xs[c]);
        if (std::abs(M.determinant()) < 1e-14) continue;
        const auto lu = M.partialPivLu();
        for (int s = 0; s < 8; ++s) {
          const Eigen::Vector3d rhs((s & 1) ? 1.0 : -1.0, (s & 2) ? 1.0 : -1.0, (s & 4) ? 1.0 : -1.0);
          const Eigen::Vector3d coef = lu.solve(rhs);
          bool feasible = true;
          for (const auto &x : xs) feasible &= std::abs(row(x) * coef) <= 1.0 + 1e-12;
          if (!feasible) continue;
          for (const auto &y : ys) best = std::max(best, std::abs(row(y) * coef));
        }
      }
  return best;
}

TEST(StabilityConstant, LinearEstimateIsBoundedByExactValue) {
  auto m = generate_lshape_triangular(3);
  for (int k : {0, 10, 33, 50}) {
    auto p = build_patch(m, k, 5);
    const double exact = linear_lambda_oracle(m, p);
    const double est = estimate_lambda(m, p, 1, 2000);
    EXPECT_GE(est, 1.0);
    EXPECT_LE(est, exact * (1 + 1e-10)) << "cell " << k;
  }
}

TEST(StabilityConstant, MonotoneInSampleCount) {
  auto m = generate_structured_triangular(6);
  auto p = build_patch(m, 20, 18);
  double prev = 0.0;
  for (int s : {0, 10, 100, 1000}) {
    const double lam = estimate_lambda(m, p, 3, s);
    EXPECT_GE(lam, prev);
    prev = lam;
  }
  EXPECT_GE(prev, 1.0);
}

TEST(StabilityConstant, DegreeZeroIsOne) {
  auto m = generate_structured_triangular(4);
  EXPECT_NEAR(estimate_lambda(m, build_patch(m, 5, 4), 0, 100), 1.0, 1e-14);
}
