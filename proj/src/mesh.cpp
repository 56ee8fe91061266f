#include "prfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "prfem/error.hpp"

namespace prfem {

namespace {

double cross(const Point &a, const Point &b) { return a.x() * b.y() - a.y() * b.x(); }

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

bool segments_cross(const Point &p1, const Point &p2, const Point &q1, const Point &q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool is_simple(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool is_convex(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point &a = poly[i];
    const Point &b = poly[(i + 1) % n];
    const Point &c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < 0.0) return false;
  }
  return true;
}

bool point_in_triangle(const Point &p, const Point &a, const Point &b, const Point &c) {
  return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
}

// Ear clipping for a simple counter-clockwise polygon.
std::vector<Triangle> ear_clip(std::span<const Point> poly) {
  std::vector<int> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<Triangle> out;
  while (idx.size() > 3) {
    const std::size_t n = idx.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Point &a = poly[idx[(i + n - 1) % n]];
      const Point &b = poly[idx[i]];
      const Point &c = poly[idx[(i + 1) % n]];
      if (cross(b - a, c - b) <= 0.0) continue;
      bool ear = true;
      for (std::size_t j = 0; j < n && ear; ++j) {
        if (j == i || j == (i + 1) % n || j == (i + n - 1) % n) continue;
        if (point_in_triangle(poly[idx[j]], a, b, c)) ear = false;
      }
      if (!ear) continue;
      out.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw MeshError("ear clipping failed on a degenerate polygon");
  }
  out.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
  return out;
}

double triangle_area(const Triangle &t) { return 0.5 * cross(t[1] - t[0], t[2] - t[0]); }

} // namespace

double signed_area(std::span<const Point> polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * a;
}

double triangle_aspect(const Triangle &t) {
  const double a = (t[1] - t[0]).norm();
  const double b = (t[2] - t[1]).norm();
  const double c = (t[0] - t[2]).norm();
  const double s = 0.5 * (a + b + c);
  const double inradius = std::abs(triangle_area(t)) / s;
  return std::max({a, b, c}) / inradius;
}

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    auto &loop = cells_[k];
    if (loop.size() < 3)
      throw MeshError("cell " + std::to_string(k) + " has fewer than 3 vertices");
    for (int v : loop) {
      if (v < 0 || v >= nv)
        throw MeshError("cell " + std::to_string(k) + " references missing vertex " +
                        std::to_string(v));
    }
    std::vector<int> sorted = loop;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw MeshError("cell " + std::to_string(k) + " repeats a vertex");

    std::vector<Point> poly;
    poly.reserve(loop.size());
    for (int v : loop) poly.push_back(vertices_[v]);
    const double a = signed_area(poly);
    if (a == 0.0) throw MeshError("cell " + std::to_string(k) + " has zero area");
    if (a < 0.0) std::reverse(loop.begin(), loop.end());
    if (loop.size() > 3 && !is_simple(poly))
      throw MeshError("cell " + std::to_string(k) + " is not a simple polygon");
  }
  build_edges();
  build_geometry();
}

void PolygonalMesh::build_edges() {
  struct Slot {
    int cell;
    int a, b; // as traversed by the cell's loop
    int first_edge_local;
  };
  std::unordered_map<std::uint64_t, std::vector<Slot>> owners;
  std::vector<std::uint64_t> order;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto &loop = cells_[k];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      const auto key = edge_key(a, b);
      auto &slots = owners[key];
      if (slots.empty()) order.push_back(key);
      slots.push_back({static_cast<int>(k), a, b, static_cast<int>(i)});
      if (slots.size() > 2) {
        throw MeshError("non-manifold edge (" + std::to_string(std::min(a, b)) + ", " +
                        std::to_string(std::max(a, b)) + ") shared by more than two cells");
      }
    }
  }

  cell_edges_.assign(cells_.size(), {});
  for (std::size_t k = 0; k < cells_.size(); ++k) cell_edges_[k].resize(cells_[k].size());
  neighbors_.assign(cells_.size(), {});

  auto outward = [this](int a, int b) {
    const Point d = vertices_[b] - vertices_[a];
    return Point(d.y(), -d.x()).normalized();
  };

  for (auto key : order) {
    const auto &slots = owners[key];
    if (slots.size() == 1) {
      const Slot &s = slots[0];
      const double len = (vertices_[s.b] - vertices_[s.a]).norm();
      cell_edges_[s.cell][s.first_edge_local] = {true, static_cast<int>(boundary_.size())};
      boundary_.push_back({{s.a, s.b}, s.cell, outward(s.a, s.b), len});
    } else {
      const Slot &l = slots[0].cell < slots[1].cell ? slots[0] : slots[1];
      const Slot &r = slots[0].cell < slots[1].cell ? slots[1] : slots[0];
      if (l.cell == r.cell)
        throw MeshError("cell " + std::to_string(l.cell) + " uses an edge twice");
      const double len = (vertices_[l.b] - vertices_[l.a]).norm();
      const int id = static_cast<int>(interior_.size());
      cell_edges_[l.cell][l.first_edge_local] = {false, id};
      cell_edges_[r.cell][r.first_edge_local] = {false, id};
      interior_.push_back({{l.a, l.b}, l.cell, r.cell, outward(l.a, l.b), len});
      neighbors_[l.cell].push_back(r.cell);
      neighbors_[r.cell].push_back(l.cell);
    }
  }
  for (auto &n : neighbors_) std::sort(n.begin(), n.end());
}

void PolygonalMesh::build_geometry() {
  const std::size_t nc = cells_.size();
  barycenters_.resize(nc);
  diameters_.resize(nc);
  areas_.resize(nc);
  subtriangles_.resize(nc);
  h_ = 0.0;
  for (std::size_t k = 0; k < nc; ++k) {
    const auto &loop = cells_[k];
    std::vector<Point> poly;
    for (int v : loop) poly.push_back(vertices_[v]);
    const std::size_t n = poly.size();

    double a = 0.0;
    Point c = Point::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = cross(poly[i], poly[(i + 1) % n]);
      a += w;
      c += w * (poly[i] + poly[(i + 1) % n]);
    }
    a *= 0.5;
    areas_[k] = a;
    barycenters_[k] = c / (6.0 * a);

    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) diam = std::max(diam, (poly[i] - poly[j]).norm());
    diameters_[k] = diam;
    h_ = std::max(h_, diam);

    auto &tris = subtriangles_[k];
    if (n == 3) {
      tris.push_back({poly[0], poly[1], poly[2]});
    } else if (n == 4 && is_convex(poly)) {
      const double d02 = (poly[0] - poly[2]).norm();
      const double d13 = (poly[1] - poly[3]).norm();
      bool use02 = d02 < d13;
      if (d02 == d13)
        use02 = std::min(loop[0], loop[2]) < std::min(loop[1], loop[3]);
      if (use02) {
        tris.push_back({poly[0], poly[1], poly[2]});
        tris.push_back({poly[0], poly[2], poly[3]});
      } else {
        tris.push_back({poly[1], poly[2], poly[3]});
        tris.push_back({poly[1], poly[3], poly[0]});
      }
    } else if (is_convex(poly)) {
      for (std::size_t i = 0; i < n; ++i)
        tris.push_back({barycenters_[k], poly[i], poly[(i + 1) % n]});
    } else {
      tris = ear_clip(poly);
    }
  }
}

double PolygonalMesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

bool PolygonalMesh::contains(int k, const Point &x, double tol) const {
  const auto &loop = cells_[k];
  const std::size_t n = loop.size();
  const double slack = tol * diameters_[k];
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point &a = vertices_[loop[i]];
    const Point &b = vertices_[loop[(i + 1) % n]];
    const Point ab = b - a;
    const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    if ((a + t * ab - x).norm() <= slack) return true;
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * ab.x() / ab.y();
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

// ---------------------------------------------------------------------------
// MSH 2.2

namespace {

std::string next_line(std::istream &in, const char *context) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw MeshError(std::string("unexpected end of file while reading ") + context);
}

void expect_line(std::istream &in, const std::string &tag) {
  const auto line = next_line(in, tag.c_str());
  if (line.rfind(tag, 0) != 0) throw MeshError("expected " + tag + ", found '" + line + "'");
}

} // namespace

PolygonalMesh load_msh(std::istream &in) {
  std::map<long, int> node_index;
  std::vector<Point> nodes;
  std::vector<std::vector<long>> raw_cells;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "$MeshFormat") {
      std::istringstream s(next_line(in, "$MeshFormat"));
      std::string version;
      int file_type = -1, data_size = -1;
      s >> version >> file_type >> data_size;
      if (!s || version != "2.2" || file_type != 0 || data_size != 8)
        throw MeshError("unsupported $MeshFormat header (expected \"2.2 0 8\")");
      expect_line(in, "$EndMeshFormat");
      have_format = true;
    } else if (line == "$Nodes") {
      if (!have_format) throw MeshError("$Nodes before $MeshFormat");
      long count = 0;
      std::istringstream(next_line(in, "$Nodes")) >> count;
      if (count <= 0) throw MeshError("$Nodes: invalid node count");
      for (long i = 0; i < count; ++i) {
        std::istringstream s(next_line(in, "$Nodes"));
        long id;
        double x, y, z;
        if (!(s >> id >> x >> y >> z)) throw MeshError("$Nodes: malformed node record " + std::to_string(i + 1));
        if (std::abs(z) > 1e-12) throw MeshError("node " + std::to_string(id) + " has nonzero z coordinate");
        if (!node_index.emplace(id, static_cast<int>(nodes.size())).second)
          throw MeshError("duplicate node id " + std::to_string(id));
        nodes.emplace_back(x, y);
      }
      expect_line(in, "$EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      if (!have_nodes) throw MeshError("$Elements before $Nodes");
      long count = 0;
      std::istringstream(next_line(in, "$Elements")) >> count;
      if (count < 0) throw MeshError("$Elements: invalid element count");
      for (long i = 0; i < count; ++i) {
        std::istringstream s(next_line(in, "$Elements"));
        long id;
        int type, ntags;
        if (!(s >> id >> type >> ntags) || ntags < 0)
          throw MeshError("$Elements: malformed element record " + std::to_string(i + 1));
        for (int t = 0; t < ntags; ++t) {
          long tag;
          if (!(s >> tag)) throw MeshError("element " + std::to_string(id) + ": missing tags");
        }
        int nn = 0;
        switch (type) {
        case 1: nn = 2; break;
        case 2: nn = 3; break;
        case 3: nn = 4; break;
        default:
          throw MeshError("element " + std::to_string(id) + ": unsupported element type " +
                          std::to_string(type));
        }
        std::vector<long> conn(nn);
        for (auto &c : conn) {
          if (!(s >> c)) throw MeshError("element " + std::to_string(id) + ": missing node ids");
          if (!node_index.count(c))
            throw MeshError("element " + std::to_string(id) + " references unknown node " + std::to_string(c));
        }
        if (type != 1) raw_cells.push_back(std::move(conn));
      }
      expect_line(in, "$EndElements");
      have_elements = true;
    } else if (line.front() == '$' && line.rfind("$End", 0) != 0) {
      // Skip unrelated sections such as $PhysicalNames.
      const std::string end = "$End" + line.substr(1);
      std::string l;
      bool closed = false;
      while (std::getline(in, l)) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (l == end) {
          closed = true;
          break;
        }
      }
      if (!closed) throw MeshError("unterminated section " + line);
    } else {
      throw MeshError("unexpected line '" + line + "'");
    }
  }
  if (!have_format) throw MeshError("missing $MeshFormat");
  if (!have_elements) throw MeshError("missing $Elements");
  if (raw_cells.empty()) throw MeshError("no triangle or quadrangle elements");

  // Keep only the nodes referenced by cells, in file order.
  std::vector<int> remap(nodes.size(), -1);
  for (const auto &rc : raw_cells)
    for (long id : rc) remap[node_index.at(id)] = 0;
  std::vector<Point> used;
  for (std::size_t n = 0; n < nodes.size(); ++n)
    if (remap[n] == 0) {
      remap[n] = static_cast<int>(used.size());
      used.push_back(nodes[n]);
    }
  std::vector<std::vector<int>> cells;
  cells.reserve(raw_cells.size());
  for (const auto &rc : raw_cells) {
    std::vector<int> loop;
    for (long id : rc) loop.push_back(remap[node_index.at(id)]);
    cells.push_back(std::move(loop));
  }
  return PolygonalMesh(std::move(used), std::move(cells));
}

PolygonalMesh load_msh_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return load_msh(in);
}

void write_msh(const PolygonalMesh &mesh, std::ostream &out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.num_vertices() << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto &p = mesh.vertices()[i];
    out << i + 1 << ' ' << p.x() << ' ' << p.y() << " 0\n";
  }
  out << "$EndNodes\n$Elements\n" << mesh.num_cells() << "\n";
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto loop = mesh.cell(static_cast<int>(k));
    int type = 0;
    if (loop.size() == 3) type = 2;
    else if (loop.size() == 4) type = 3;
    else throw MeshError("cell " + std::to_string(k) + " cannot be written as MSH 2.2 element");
    out << k + 1 << ' ' << type << " 2 0 0";
    for (int v : loop) out << ' ' << v + 1;
    out << '\n';
  }
  out << "$EndElements\n";
}

// ---------------------------------------------------------------------------
// Generators

PolygonalMesh generate_structured_triangular(int n) {
  if (n < 1) throw DomainError("generate_structured_triangular: n must be >= 1");
  std::vector<Point> v;
  v.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(double(i) / n, double(j) / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return PolygonalMesh(std::move(v), std::move(cells));
}

PolygonalMesh generate_structured_quadrilateral(int n) {
  if (n < 1) throw DomainError("generate_structured_quadrilateral: n must be >= 1");
  std::vector<Point> v;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(double(i) / n, double(j) / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return PolygonalMesh(std::move(v), std::move(cells));
}

PolygonalMesh generate_lshape_triangular(int n) {
  if (n < 1) throw DomainError("generate_lshape_triangular: n must be >= 1");
  const int m = 2 * n;
  auto removed = [n](int i, int j) { return i >= n && j < n; };
  std::vector<int> index((m + 1) * (m + 1), -1);
  std::vector<Point> v;
  auto vid = [&](int i, int j) {
    int &slot = index[j * (m + 1) + i];
    if (slot < 0) {
      slot = static_cast<int>(v.size());
      v.emplace_back(double(i - n) / n, double(j - n) / n);
    }
    return slot;
  };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (removed(i, j)) continue;
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }
  }
  return PolygonalMesh(std::move(v), std::move(cells));
}

PolygonalMesh refine_red(const PolygonalMesh &mesh) {
  std::vector<Point> v = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(v.size());
    v.push_back(0.5 * (v[a] + v[b]));
    midpoint.emplace(key, id);
    return id;
  };
  std::vector<std::vector<int>> cells;
  cells.reserve(4 * mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto t = mesh.cell(static_cast<int>(k));
    if (t.size() != 3)
      throw MeshError("refine_red: cell " + std::to_string(k) + " is not a triangle");
    const int a = t[0], b = t[1], c = t[2];
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    cells.push_back({a, ab, ca});
    cells.push_back({ab, b, bc});
    cells.push_back({ca, bc, c});
    cells.push_back({ab, bc, ca});
  }
  return PolygonalMesh(std::move(v), std::move(cells));
}

MeshQualityReport mesh_quality(const PolygonalMesh &mesh) {
  MeshQualityReport r;
  r.min_edge_length = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto tris = mesh.subtriangles(static_cast<int>(k));
    r.max_subtriangles_per_cell = std::max(r.max_subtriangles_per_cell, static_cast<int>(tris.size()));
    for (const auto &t : tris) r.max_aspect = std::max(r.max_aspect, triangle_aspect(t));
  }
  for (const auto &e : mesh.interior_edges()) {
    r.min_edge_length = std::min(r.min_edge_length, e.length);
    r.max_edge_length = std::max(r.max_edge_length, e.length);
  }
  for (const auto &e : mesh.boundary_edges()) {
    r.min_edge_length = std::min(r.min_edge_length, e.length);
    r.max_edge_length = std::max(r.max_edge_length, e.length);
  }
  return r;
}

} // namespace prfem
