#include "prfem/io.hpp"

#include <cmath>
#include <cstdio>

namespace prfem {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", value);
  return buf;
}

std::string pair_label(const SpacePair &pair) { return std::to_string(pair.k) + ":" + std::to_string(pair.k_p); }

void write_vtk(std::ostream &os, const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
               const ReconstructionBasis &basis_p, const StokesSolution &solution, const std::string &title) {
  const int n = static_cast<int>(mesh.num_cells());
  const std::vector<double> ux(solution.U.data(), solution.U.data() + n);
  const std::vector<double> uy(solution.U.data() + n, solution.U.data() + 2 * n);
  const std::vector<double> pv(solution.P.data(), solution.P.data() + n);
  const auto fx = reconstruct(basis_u, ux);
  const auto fy = reconstruct(basis_u, uy);
  const auto fp = reconstruct(basis_p, pv);

  std::size_t ntri = 0;
  for (int c = 0; c < n; ++c) ntri += mesh.subtriangles(c).size();

  char buf[128];
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << 3 * ntri << " double\n";
  for (int c = 0; c < n; ++c)
    for (const auto &t : mesh.subtriangles(c))
      for (const auto &p : t) {
        std::snprintf(buf, sizeof buf, "%.10e %.10e 0\n", p.x(), p.y());
        os << buf;
      }
  os << "CELLS " << ntri << " " << 4 * ntri << "\n";
  for (std::size_t i = 0; i < ntri; ++i) os << "3 " << 3 * i << " " << 3 * i + 1 << " " << 3 * i + 2 << "\n";
  os << "CELL_TYPES " << ntri << "\n";
  for (std::size_t i = 0; i < ntri; ++i) os << "5\n";

  os << "POINT_DATA " << 3 * ntri << "\nVECTORS velocity double\n";
  for (int c = 0; c < n; ++c)
    for (const auto &t : mesh.subtriangles(c))
      for (const auto &p : t) {
        std::snprintf(buf, sizeof buf, "%.10e %.10e 0\n", fx.value(c, p), fy.value(c, p));
        os << buf;
      }
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < n; ++c)
    for (const auto &t : mesh.subtriangles(c))
      for (const auto &p : t) {
        std::snprintf(buf, sizeof buf, "%.10e\n", fp.value(c, p));
        os << buf;
      }
}

namespace {

void errors_row(std::ostream &os, const ErrorReport &r) {
  os << format_number(r.h) << ',' << r.dofs << ',' << format_number(r.l2_velocity) << ','
     << format_number(r.dg_velocity) << ',' << format_number(r.l2_pressure);
}

} // namespace

void write_errors_csv(std::ostream &os, const std::vector<ErrorReport> &reports) {
  os << "h,dofs,l2_u,dg_u,l2_p\n";
  for (const auto &r : reports) {
    errors_row(os, r);
    os << '\n';
  }
}

void write_convergence_csv(std::ostream &os, const ConvergenceStudy &study) {
  os << "h,dofs,l2_u,dg_u,l2_p,order_l2_u,order_dg_u,order_l2_p\n";
  for (std::size_t i = 0; i < study.reports.size(); ++i) {
    errors_row(os, study.reports[i]);
    if (i == 0) {
      os << ",,,\n";
    } else {
      os << ',' << format_number(study.order_l2_u[i - 1]) << ',' << format_number(study.order_dg_u[i - 1]) << ','
         << format_number(study.order_l2_p[i - 1]) << '\n';
    }
  }
}

void write_infsup_csv(std::ostream &os, const std::vector<InfSupReport> &reports) {
  os << "pair,h,mu_min,ratio,verdict\n";
  for (const auto &r : reports) {
    const char *verdict = r.pass ? "PASS" : "FAIL";
    for (const auto &e : r.entries) {
      os << pair_label(r.pair) << ',' << format_number(e.h) << ',' << format_number(e.mu_min) << ','
         << format_number(e.ratio) << ',' << verdict << '\n';
    }
    if (r.entries.empty()) os << pair_label(r.pair) << ",nan,nan,nan," << verdict << '\n';
  }
}

void write_lshape_csv(std::ostream &os, const SpacePair &pair, const std::vector<LShapeRow> &rows, bool header) {
  if (header) os << "pair,dofs,l2_u,order\n";
  for (const auto &r : rows)
    os << pair_label(pair) << ',' << r.dofs << ',' << format_number(r.l2_error) << ',' << format_number(r.order)
       << '\n';
}

} // namespace prfem
