#include "prfem/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <unordered_map>

#include "prfem/error.hpp"
#include "prfem/quadrature.hpp"

namespace prfem {

namespace {

constexpr std::array<int, 5> kTriangularTargets{5, 9, 18, 25, 32};
constexpr std::array<int, 5> kMixedTargets{6, 10, 20, 28, 35};

using Triplets = std::vector<Eigen::Triplet<double>>;

// Cell-local basis data at quadrature points.
struct CellData {
  PhysicalQuadrature quad;
  Eigen::VectorXd w;
  Eigen::MatrixXd phi, dx, dy; // nq x #S(K)
};

CellData cell_data(const ReconstructionBasis &basis, int k, int order, bool with_gradients) {
  CellData d;
  d.quad = cell_quadrature(basis.mesh(), k, order);
  d.w = Eigen::Map<const Eigen::VectorXd>(d.quad.weights.data(), static_cast<Eigen::Index>(d.quad.weights.size()));
  d.phi = basis.values(k, d.quad.points);
  if (with_gradients) basis.gradients(k, d.quad.points, d.dx, d.dy);
  return d;
}

// Traces of a basis on one edge. Local columns index `dofs`, the union of
// the members of both adjacent cells. With n the normal of the left cell:
//   jump   = v_left - v_right          ([[v]] = jump * n)
//   avg    = (v_left + v_right) / 2
//   avg_dn = (dv_left/dn + dv_right/dn) / 2
// On boundary edges only the left (owner) side exists: jump = avg = v.
struct EdgeTrace {
  std::vector<int> dofs;
  Eigen::MatrixXd jump, avg, avg_dn, dn; // nq x #dofs
};

struct EdgeGeometry {
  int left;
  int right; // -1 on the boundary
  Point normal;
  double length;
  PhysicalQuadrature quad;
  Eigen::VectorXd w;
};

EdgeGeometry interior_geometry(const PolygonalMesh &mesh, int i, int order) {
  const auto &e = mesh.interior_edges()[i];
  EdgeGeometry g{e.left, e.right, e.normal, e.length, edge_quadrature(mesh, {false, i}, order), {}};
  g.w = Eigen::Map<const Eigen::VectorXd>(g.quad.weights.data(), static_cast<Eigen::Index>(g.quad.weights.size()));
  return g;
}

EdgeGeometry boundary_geometry(const PolygonalMesh &mesh, int i, int order) {
  const auto &e = mesh.boundary_edges()[i];
  EdgeGeometry g{e.owner, -1, e.normal, e.length, edge_quadrature(mesh, {true, i}, order), {}};
  g.w = Eigen::Map<const Eigen::VectorXd>(g.quad.weights.data(), static_cast<Eigen::Index>(g.quad.weights.size()));
  return g;
}

EdgeTrace edge_trace(const ReconstructionBasis &basis, const EdgeGeometry &eg) {
  EdgeTrace t;
  const auto ml = basis.members(eg.left);
  t.dofs.assign(ml.begin(), ml.end());
  std::vector<int> right_index;
  if (eg.right >= 0) {
    for (int j : basis.members(eg.right)) {
      auto it = std::find(t.dofs.begin(), t.dofs.end(), j);
      if (it == t.dofs.end()) {
        right_index.push_back(static_cast<int>(t.dofs.size()));
        t.dofs.push_back(j);
      } else {
        right_index.push_back(static_cast<int>(it - t.dofs.begin()));
      }
    }
  }
  const auto nq = static_cast<Eigen::Index>(eg.quad.points.size());
  const auto nd = static_cast<Eigen::Index>(t.dofs.size());
  t.jump = Eigen::MatrixXd::Zero(nq, nd);
  t.avg = Eigen::MatrixXd::Zero(nq, nd);
  t.avg_dn = Eigen::MatrixXd::Zero(nq, nd);
  t.dn = Eigen::MatrixXd::Zero(nq, nd);

  Eigen::MatrixXd dx, dy;
  const Eigen::MatrixXd vl = basis.values(eg.left, eg.quad.points);
  basis.gradients(eg.left, eg.quad.points, dx, dy);
  const Eigen::MatrixXd dnl = eg.normal.x() * dx + eg.normal.y() * dy;
  const auto nl = static_cast<Eigen::Index>(ml.size());
  if (eg.right < 0) {
    t.jump.leftCols(nl) = vl;
    t.avg.leftCols(nl) = vl;
    t.avg_dn.leftCols(nl) = dnl;
    t.dn.leftCols(nl) = dnl;
    return t;
  }
  t.jump.leftCols(nl) = vl;
  t.avg.leftCols(nl) = 0.5 * vl;
  t.avg_dn.leftCols(nl) = 0.5 * dnl;
  t.dn.leftCols(nl) = dnl;

  const Eigen::MatrixXd vr = basis.values(eg.right, eg.quad.points);
  basis.gradients(eg.right, eg.quad.points, dx, dy);
  const Eigen::MatrixXd dnr = eg.normal.x() * dx + eg.normal.y() * dy;
  for (std::size_t j = 0; j < right_index.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(right_index[j]);
    const auto s = static_cast<Eigen::Index>(j);
    t.jump.col(c) -= vr.col(s);
    t.avg.col(c) += 0.5 * vr.col(s);
    t.avg_dn.col(c) += 0.5 * dnr.col(s);
  }
  return t;
}

void scatter(Triplets &out, std::span<const int> rows, std::span<const int> cols, const Eigen::MatrixXd &local,
             int row_offset = 0, int col_offset = 0) {
  for (Eigen::Index i = 0; i < local.rows(); ++i)
    for (Eigen::Index j = 0; j < local.cols(); ++j)
      if (local(i, j) != 0.0) out.emplace_back(rows[i] + row_offset, cols[j] + col_offset, local(i, j));
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets &t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Adds a scalar-block local matrix to both velocity components.
void scatter_vector_block(Triplets &out, std::span<const int> dofs, const Eigen::MatrixXd &local, int n) {
  scatter(out, dofs, dofs, local, 0, 0);
  scatter(out, dofs, dofs, local, n, n);
}

int clamp_volume(int d) { return std::clamp(d, 0, kMaxTriangleDegree); }
int clamp_edge(int d) { return std::clamp(d, 0, kMaxEdgeDegree); }

} // namespace

MeshKind classify_mesh(const PolygonalMesh &mesh) {
  for (const auto &c : mesh.cells())
    if (c.size() != 3) return MeshKind::mixed;
  return MeshKind::triangular;
}

int default_patch_target(int degree, MeshKind kind) {
  if (degree == 0) return 1;
  if (degree < 1 || degree > 5) throw DomainError("no default patch size for degree " + std::to_string(degree));
  return kind == MeshKind::triangular ? kTriangularTargets[degree - 1] : kMixedTargets[degree - 1];
}

SpacePair SpacePair::with_defaults(int k, int k_p, MeshKind kind) {
  if (k < 1) throw DomainError("velocity degree must be >= 1");
  if (k_p < 0) throw DomainError("pressure degree must be >= 0");
  return {k, k_p, default_patch_target(k, kind), default_patch_target(k_p, kind)};
}

QuadratureOrders quadrature_orders(const DGConfig &config, int k, int k_p) {
  const int m = std::max(k, k_p);
  QuadratureOrders q;
  q.volume = clamp_volume(config.volume_order >= 0 ? config.volume_order : 2 * m);
  q.edge = clamp_edge(config.edge_order >= 0 ? config.edge_order : 2 * m + 1);
  q.load = clamp_volume(config.load_order >= 0 ? config.load_order : 2 * m + 4);
  return q;
}

SparseMatrix assemble_a(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u, const DGConfig &config) {
  if (!(config.mu > 0.0)) throw DomainError("penalty constant mu must be positive");
  const int n = static_cast<int>(mesh.num_cells());
  const auto orders = quadrature_orders(config, basis_u.degree());
  Triplets t;

  for (int k = 0; k < n; ++k) {
    const CellData d = cell_data(basis_u, k, orders.volume, true);
    const Eigen::MatrixXd local = d.dx.transpose() * d.w.asDiagonal() * d.dx + d.dy.transpose() * d.w.asDiagonal() * d.dy;
    scatter_vector_block(t, basis_u.members(k), local, n);
  }

  auto edge_term = [&](const EdgeGeometry &eg) {
    const EdgeTrace tr = edge_trace(basis_u, eg);
    const double eta = config.mu / eg.length;
    const Eigen::MatrixXd cons = tr.avg_dn.transpose() * eg.w.asDiagonal() * tr.jump;
    const Eigen::MatrixXd local =
        -(cons + cons.transpose()) + eta * (tr.jump.transpose() * eg.w.asDiagonal() * tr.jump);
    scatter_vector_block(t, tr.dofs, local, n);
  };
  for (int i = 0; i < static_cast<int>(mesh.interior_edges().size()); ++i)
    edge_term(interior_geometry(mesh, i, orders.edge));
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i)
    edge_term(boundary_geometry(mesh, i, orders.edge));

  return from_triplets(2 * n, 2 * n, t);
}

SparseMatrix assemble_b(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                        const ReconstructionBasis &basis_p, const DGConfig &config) {
  const int n = static_cast<int>(mesh.num_cells());
  const auto orders = quadrature_orders(config, basis_u.degree(), basis_p.degree());
  Triplets t;

  for (int k = 0; k < n; ++k) {
    const CellData du = cell_data(basis_u, k, orders.volume, true);
    const Eigen::MatrixXd phi_p = basis_p.values(k, du.quad.points);
    const Eigen::MatrixXd bx = -(phi_p.transpose() * du.w.asDiagonal() * du.dx);
    const Eigen::MatrixXd by = -(phi_p.transpose() * du.w.asDiagonal() * du.dy);
    scatter(t, basis_p.members(k), basis_u.members(k), bx, 0, 0);
    scatter(t, basis_p.members(k), basis_u.members(k), by, 0, n);
  }

  auto edge_term = [&](const EdgeGeometry &eg) {
    const EdgeTrace tu = edge_trace(basis_u, eg);
    const EdgeTrace tp = edge_trace(basis_p, eg);
    const Eigen::MatrixXd m = tp.avg.transpose() * eg.w.asDiagonal() * tu.jump;
    scatter(t, tp.dofs, tu.dofs, eg.normal.x() * m, 0, 0);
    scatter(t, tp.dofs, tu.dofs, eg.normal.y() * m, 0, n);
  };
  for (int i = 0; i < static_cast<int>(mesh.interior_edges().size()); ++i)
    edge_term(interior_geometry(mesh, i, orders.edge));
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i)
    edge_term(boundary_geometry(mesh, i, orders.edge));

  return from_triplets(n, 2 * n, t);
}

LoadVectors assemble_loads(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                           const ReconstructionBasis &basis_p, const VectorField &f, const VectorField &g,
                           const DGConfig &config) {
  const int n = static_cast<int>(mesh.num_cells());
  const auto orders = quadrature_orders(config, basis_u.degree(), basis_p.degree());
  const int edge_load = clamp_edge(orders.load + 1);
  LoadVectors out;
  out.F = Eigen::VectorXd::Zero(2 * n);
  out.G = Eigen::VectorXd::Zero(n);

  for (int k = 0; k < n; ++k) {
    const CellData d = cell_data(basis_u, k, orders.load, false);
    const auto nq = d.quad.points.size();
    Eigen::VectorXd fx(nq), fy(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      const Eigen::Vector2d v = f(d.quad.points[q]);
      fx(static_cast<Eigen::Index>(q)) = v.x() * d.w(static_cast<Eigen::Index>(q));
      fy(static_cast<Eigen::Index>(q)) = v.y() * d.w(static_cast<Eigen::Index>(q));
    }
    const Eigen::VectorXd lx = d.phi.transpose() * fx;
    const Eigen::VectorXd ly = d.phi.transpose() * fy;
    const auto members = basis_u.members(k);
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.F(members[j]) += lx(static_cast<Eigen::Index>(j));
      out.F(n + members[j]) += ly(static_cast<Eigen::Index>(j));
    }
  }

  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i) {
    const EdgeGeometry eg = boundary_geometry(mesh, i, edge_load);
    const EdgeTrace tu = edge_trace(basis_u, eg);
    const EdgeTrace tp = edge_trace(basis_p, eg);
    const double eta = config.mu / eg.length;
    const auto nq = eg.quad.points.size();
    Eigen::VectorXd gx(nq), gy(nq), gn(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      const Eigen::Vector2d v = g(eg.quad.points[q]);
      const auto iq = static_cast<Eigen::Index>(q);
      gx(iq) = v.x() * eg.w(iq);
      gy(iq) = v.y() * eg.w(iq);
      gn(iq) = v.dot(eg.normal) * eg.w(iq);
    }
    const Eigen::VectorXd lx = -(tu.dn.transpose() * gx) + eta * (tu.jump.transpose() * gx);
    const Eigen::VectorXd ly = -(tu.dn.transpose() * gy) + eta * (tu.jump.transpose() * gy);
    for (std::size_t j = 0; j < tu.dofs.size(); ++j) {
      out.F(tu.dofs[j]) += lx(static_cast<Eigen::Index>(j));
      out.F(n + tu.dofs[j]) += ly(static_cast<Eigen::Index>(j));
    }
    const Eigen::VectorXd lp = tp.avg.transpose() * gn;
    for (std::size_t j = 0; j < tp.dofs.size(); ++j) out.G(tp.dofs[j]) += lp(static_cast<Eigen::Index>(j));
    out.compatibility += gn.sum();
  }

  if (std::abs(out.compatibility) > 1e-8) {
    std::cerr << "warning: boundary data violates the compatibility condition, integral of g.n = "
              << out.compatibility << '\n';
  }
  return out;
}

NormMatrices assemble_norm_matrices(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                                    const ReconstructionBasis &basis_p, const DGConfig &config) {
  const int n = static_cast<int>(mesh.num_cells());
  const auto ou = quadrature_orders(config, basis_u.degree());
  const auto op = quadrature_orders(config, basis_p.degree());
  Triplets ts, tt;

  for (int k = 0; k < n; ++k) {
    const CellData du = cell_data(basis_u, k, ou.volume, true);
    const Eigen::MatrixXd s = du.dx.transpose() * du.w.asDiagonal() * du.dx + du.dy.transpose() * du.w.asDiagonal() * du.dy;
    scatter_vector_block(ts, basis_u.members(k), s, n);

    const CellData dp = cell_data(basis_p, k, op.volume, false);
    const Eigen::MatrixXd m = dp.phi.transpose() * dp.w.asDiagonal() * dp.phi;
    scatter(tt, basis_p.members(k), basis_p.members(k), m);
  }

  auto edge_term = [&](const EdgeGeometry &eg) {
    const EdgeTrace tr = edge_trace(basis_u, eg);
    const Eigen::MatrixXd local = (tr.jump.transpose() * eg.w.asDiagonal() * tr.jump) / eg.length;
    scatter_vector_block(ts, tr.dofs, local, n);
  };
  for (int i = 0; i < static_cast<int>(mesh.interior_edges().size()); ++i)
    edge_term(interior_geometry(mesh, i, ou.edge));
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i)
    edge_term(boundary_geometry(mesh, i, ou.edge));

  return {from_triplets(2 * n, 2 * n, ts), from_triplets(n, n, tt)};
}

Eigen::VectorXd basis_integrals(const PolygonalMesh &mesh, const ReconstructionBasis &basis, int order) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_cells()));
  for (int k = 0; k < static_cast<int>(mesh.num_cells()); ++k) {
    const CellData d = cell_data(basis, k, clamp_volume(order), false);
    const Eigen::VectorXd local = d.phi.transpose() * d.w;
    const auto members = basis.members(k);
    for (std::size_t j = 0; j < members.size(); ++j) out(members[j]) += local(static_cast<Eigen::Index>(j));
  }
  return out;
}

StokesSystem assemble_system(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                             const ReconstructionBasis &basis_p, const VectorField &f, const VectorField &g,
                             const DGConfig &config) {
  StokesSystem sys;
  sys.num_cells = static_cast<int>(mesh.num_cells());
  sys.A = assemble_a(mesh, basis_u, config);
  sys.B = assemble_b(mesh, basis_u, basis_p, config);
  auto loads = assemble_loads(mesh, basis_u, basis_p, f, g, config);
  sys.F = std::move(loads.F);
  sys.G = std::move(loads.G);
  auto norms = assemble_norm_matrices(mesh, basis_u, basis_p, config);
  sys.S = std::move(norms.S);
  sys.T = std::move(norms.T);
  sys.pressure_integrals = basis_integrals(mesh, basis_p, basis_p.degree());
  return sys;
}

} // namespace prfem
