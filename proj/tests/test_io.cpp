#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "prfem/io.hpp"

using namespace prfem;

namespace {

std::vector<std::string> lines_of(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t find_line(const std::vector<std::string> &lines, const std::string &prefix) {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].rfind(prefix, 0) == 0) return i;
  return lines.size();
}

} // namespace

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(1.5), "1.500000e+00");
  EXPECT_EQ(format_number(-2.25e-7), "-2.250000e-07");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(pair_label(SpacePair{2, 1, 9, 5}), "2:1");
}

TEST(Csv, ErrorsTable) {
  ErrorReport r{0.5, 0.25, std::nan(""), 32, 0.125};
  std::ostringstream os;
  write_errors_csv(os, {r});
  EXPECT_EQ(os.str(), "h,dofs,l2_u,dg_u,l2_p\n1.250000e-01,32,5.000000e-01,2.500000e-01,nan\n");
}

TEST(Csv, ConvergenceTable) {
  ConvergenceStudy s;
  s.reports = {{1.0, 2.0, 3.0, 10, 0.5}, {0.25, 0.5, 0.75, 40, 0.25}};
  s.order_l2_u = {2.0};
  s.order_dg_u = {2.0};
  s.order_l2_p = {2.0};
  std::ostringstream os;
  write_convergence_csv(os, s);
  auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "h,dofs,l2_u,dg_u,l2_p,order_l2_u,order_dg_u,order_l2_p");
  EXPECT_EQ(lines[1], "5.000000e-01,10,1.000000e+00,2.000000e+00,3.000000e+00,,,");
  EXPECT_EQ(lines[2], "2.500000e-01,40,2.500000e-01,5.000000e-01,7.500000e-01,2.000000e+00,2.000000e+00,2.000000e+00");
}

TEST(Csv, InfSupTable) {
  InfSupReport a{SpacePair{1, 1, 5, 5}, {{0.1, 0.2, std::nan(""), 1}, {0.05, 0.19, 0.95, 1}}, true, ""};
  InfSupReport b{SpacePair{2, 0, 9, 1}, {{0.1, 0.2, std::nan(""), 1}, {0.05, 0.1, 0.5, 1}}, false, "ratio"};
  std::ostringstream os;
  write_infsup_csv(os, {a, b});
  auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "pair,h,mu_min,ratio,verdict");
  EXPECT_EQ(lines[1], "1:1,1.000000e-01,2.000000e-01,nan,PASS");
  EXPECT_EQ(lines[4], "2:0,5.000000e-02,1.000000e-01,5.000000e-01,FAIL");
}

TEST(Csv, LShapeTable) {
  std::vector<LShapeRow> rows = {{216, 0.1, 0.04, std::nan("")}, {864, 0.05, 0.02, 1.0}};
  std::ostringstream os;
  write_lshape_csv(os, SpacePair{2, 1, 9, 5}, rows);
  write_lshape_csv(os, SpacePair{2, 2, 9, 9}, rows, false);
  auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "pair,dofs,l2_u,order");
  EXPECT_EQ(lines[1], "2:1,216,4.000000e-02,nan");
  EXPECT_EQ(lines[4], "2:2,864,2.000000e-02,1.000000e+00");
}

TEST(Vtk, LegacyStructureAndValues) {
  auto mesh = generate_structured_quadrilateral(3);
  auto disc = discretize(mesh, SpacePair::with_defaults(2, 1, MeshKind::mixed));
  auto run = run_problem(mesh, disc, smooth_case(), DGConfig{});
  std::ostringstream os;
  write_vtk(os, mesh, disc.basis_u, disc.basis_p, run.solution, "unit");
  auto lines = lines_of(os.str());
  ASSERT_GE(lines.size(), 5u);
  EXPECT_EQ(lines[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(lines[1], "unit");
  EXPECT_EQ(lines[2], "ASCII");
  EXPECT_EQ(lines[3], "DATASET UNSTRUCTURED_GRID");

  std::size_t ntri = 0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) ntri += mesh.subtriangles(static_cast<int>(k)).size();
  EXPECT_EQ(ntri, 18u);
  const std::size_t pts = find_line(lines, "POINTS ");
  EXPECT_EQ(lines[pts], "POINTS " + std::to_string(3 * ntri) + " double");
  const std::size_t cells = find_line(lines, "CELLS ");
  EXPECT_EQ(cells, pts + 1 + 3 * ntri);
  EXPECT_EQ(lines[cells], "CELLS " + std::to_string(ntri) + " " + std::to_string(4 * ntri));
  const std::size_t types = find_line(lines, "CELL_TYPES ");
  EXPECT_EQ(types, cells + 1 + ntri);
  for (std::size_t i = 0; i < ntri; ++i) EXPECT_EQ(lines[types + 1 + i], "5");
  const std::size_t pdata = find_line(lines, "POINT_DATA ");
  EXPECT_EQ(lines[pdata], "POINT_DATA " + std::to_string(3 * ntri));
  EXPECT_EQ(lines[pdata + 1], "VECTORS velocity double");
  const std::size_t scal = find_line(lines, "SCALARS pressure");
  EXPECT_EQ(scal, pdata + 2 + 3 * ntri);
  EXPECT_EQ(lines[scal + 1], "LOOKUP_TABLE default");
  EXPECT_EQ(lines.size(), scal + 2 + 3 * ntri);

  // The first point carries the cell-0 trace of the discrete fields.
  std::istringstream first(lines[pdata + 2]);
  double vx, vy, vz;
  first >> vx >> vy >> vz;
  const Point p0 = mesh.subtriangles(0)[0][0];
  std::vector<double> ux(run.solution.U.data(), run.solution.U.data() + mesh.num_cells());
  EXPECT_NEAR(vx, reconstruct(disc.basis_u, ux).value(0, p0), 1e-9);
  EXPECT_EQ(vz, 0.0);
}

TEST(Vtk, DeterministicOutput) {
  auto mesh = generate_structured_triangular(3);
  auto disc = discretize(mesh, SpacePair::with_defaults(1, 0));
  auto run = run_problem(mesh, disc, cavity_case(), DGConfig{});
  std::ostringstream a, b;
  write_vtk(a, mesh, disc.basis_u, disc.basis_p, run.solution);
  write_vtk(b, mesh, disc.basis_u, disc.basis_p, run.solution);
  EXPECT_EQ(a.str(), b.str());
}
