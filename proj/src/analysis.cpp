#include "prfem/analysis.hpp"

#include <cmath>
#include <atomic>
#include <exception>
#include <thread>
#include <limits>
#include <numbers>

#include "prfem/error.hpp"
#include "prfem/quadrature.hpp"

namespace prfem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOmega = 1.5 * std::numbers::pi;

} // namespace

ManufacturedSolution smooth_solution() {
  ManufacturedSolution s;
  s.u = [](const Point &x) {
    const double a = 2.0 * kPi * x.x(), b = 2.0 * kPi * x.y();
    return Eigen::Vector2d(std::sin(a) * std::cos(b), -std::cos(a) * std::sin(b));
  };
  s.grad_u = [](const Point &x) {
    const double a = 2.0 * kPi * x.x(), b = 2.0 * kPi * x.y();
    const double w = 2.0 * kPi;
    Eigen::Matrix2d g;
    g << w * std::cos(a) * std::cos(b), -w * std::sin(a) * std::sin(b),
        w * std::sin(a) * std::sin(b), -w * std::cos(a) * std::cos(b);
    return g;
  };
  s.p = [](const Point &x) { return x.squaredNorm(); };
  s.f = [](const Point &x) {
    const double a = 2.0 * kPi * x.x(), b = 2.0 * kPi * x.y();
    const double c = 8.0 * kPi * kPi;
    return Eigen::Vector2d(c * std::sin(a) * std::cos(b) + 2.0 * x.x(),
                           -c * std::cos(a) * std::sin(b) + 2.0 * x.y());
  };
  s.g = s.u;
  return s;
}

double solve_lambda() {
  auto residual = [](double l) { return std::sin(l * kOmega) + l * std::sin(kOmega); };
  double lo = 0.1, hi = 0.9;
  double flo = residual(lo);
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Angular profile psi and its derivatives for the L-shape corner solution.
struct Psi {
  double lambda;
  double cw; // cos(lambda * omega)

  double operator()(double t, int derivative) const {
    const double a = 1.0 + lambda, b = 1.0 - lambda;
    const double sa = std::sin(a * t), ca = std::cos(a * t);
    const double sb = std::sin(b * t), cb = std::cos(b * t);
    switch (derivative) {
    case 0: return sa * cw / a - ca - sb * cw / b + cb;
    case 1: return ca * cw + a * sa - cb * cw - b * sb;
    case 2: return -a * sa * cw + a * a * ca + b * sb * cw - b * b * cb;
    case 3: return -a * a * ca * cw - a * a * a * sa + b * b * cb * cw + b * b * b * sb;
    default: throw DomainError("Psi: unsupported derivative");
    }
  }
};

double polar_angle(const Point &x) {
  double t = std::atan2(x.y(), x.x());
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

} // namespace

ManufacturedSolution lshape_solution(bool with_pressure) {
  const double lambda = solve_lambda();
  const Psi psi{lambda, std::cos(lambda * kOmega)};

  // u = r^lambda * phi(theta)
  auto phi = [psi, lambda](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double p0 = psi(t, 0), p1 = psi(t, 1);
    return Eigen::Vector2d((1.0 + lambda) * s * p0 + c * p1, s * p1 - (1.0 + lambda) * c * p0);
  };
  auto dphi = [psi, lambda](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double p0 = psi(t, 0), p1 = psi(t, 1), p2 = psi(t, 2);
    return Eigen::Vector2d((1.0 + lambda) * (c * p0 + s * p1) - s * p1 + c * p2,
                           c * p1 + s * p2 - (1.0 + lambda) * (-s * p0 + c * p1));
  };

  ManufacturedSolution s;
  s.u = [phi, lambda](const Point &x) -> Eigen::Vector2d {
    const double r = x.norm();
    if (r == 0.0) return Eigen::Vector2d::Zero();
    return std::pow(r, lambda) * phi(polar_angle(x));
  };
  s.grad_u = [phi, dphi, lambda](const Point &x) -> Eigen::Matrix2d {
    const double r = x.norm();
    if (r == 0.0) return Eigen::Matrix2d::Zero();
    const double t = polar_angle(x);
    const double s = std::sin(t), c = std::cos(t);
    const double rl = std::pow(r, lambda - 1.0);
    const Eigen::Vector2d f = phi(t), df = dphi(t);
    Eigen::Matrix2d g;
    g.col(0) = rl * (lambda * c * f - s * df);
    g.col(1) = rl * (lambda * s * f + c * df);
    return g;
  };
  if (with_pressure) {
    s.p = [psi, lambda](const Point &x) {
      const double r = x.norm();
      if (r == 0.0) return 0.0;
      const double t = polar_angle(x);
      return -std::pow(r, lambda - 1.0) * ((1.0 + lambda) * (1.0 + lambda) * psi(t, 1) + psi(t, 3)) /
             (1.0 - lambda);
    };
  }
  s.f = [](const Point &) { return Eigen::Vector2d::Zero(); };
  s.g = s.u;
  return s;
}

ManufacturedSolution polynomial_solution(int k, int k_p) {
  if (k < 1 || k_p < 0) throw DomainError("polynomial_solution: need k >= 1 and k_p >= 0");
  // Stream function ((x + 2y)^{k+1} + (3x - y)^{k+1}) / (k + 1).
  const double kk = k;
  auto pw = [](double base, int e) { return e < 0 ? 0.0 : std::pow(base, e); };
  ManufacturedSolution s;
  s.u = [k, pw](const Point &x) {
    const double a = x.x() + 2.0 * x.y(), b = 3.0 * x.x() - x.y();
    return Eigen::Vector2d(2.0 * pw(a, k) - pw(b, k), -pw(a, k) - 3.0 * pw(b, k));
  };
  s.grad_u = [k, kk, pw](const Point &x) {
    const double a = x.x() + 2.0 * x.y(), b = 3.0 * x.x() - x.y();
    const double da = kk * pw(a, k - 1), db = kk * pw(b, k - 1);
    Eigen::Matrix2d g;
    g << 2.0 * da - 3.0 * db, 4.0 * da + db, -da - 9.0 * db, -2.0 * da + 3.0 * db;
    return g;
  };
  s.p = [k_p, pw](const Point &x) { return pw(x.x() - 2.0 * x.y() + 0.5, k_p); };
  s.f = [k, kk, k_p, pw](const Point &x) {
    const double a = x.x() + 2.0 * x.y(), b = 3.0 * x.x() - x.y();
    const double la = 5.0 * kk * (kk - 1.0) * pw(a, k - 2);  // laplacian of a^k
    const double lb = 10.0 * kk * (kk - 1.0) * pw(b, k - 2); // laplacian of b^k
    const double dp = k_p > 0 ? k_p * pw(x.x() - 2.0 * x.y() + 0.5, k_p - 1) : 0.0;
    return Eigen::Vector2d(-(2.0 * la - lb) + dp, -(-la - 3.0 * lb) - 2.0 * dp);
  };
  s.g = s.u;
  return s;
}

StokesProblem cavity_case() {
  StokesProblem p;
  p.name = "cavity";
  p.f = [](const Point &) { return Eigen::Vector2d::Zero(); };
  p.g = [](const Point &x) {
    const bool lid = std::abs(x.y() - 1.0) <= 1e-12 && x.x() > 0.0 && x.x() < 1.0;
    return lid ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d::Zero();
  };
  return p;
}

StokesProblem smooth_case() {
  auto s = smooth_solution();
  return {"smooth", s.f, s.g, s, true};
}

StokesProblem lshape_case() {
  auto s = lshape_solution(false);
  return {"lshape", s.f, s.g, s, false};
}

StokesProblem polynomial_case(int k, int k_p) {
  auto s = polynomial_solution(k, k_p);
  return {"polynomial", s.f, s.g, s, true};
}

StokesProblem make_problem(const std::string &name) {
  if (name == "smooth") return smooth_case();
  if (name == "cavity") return cavity_case();
  if (name == "lshape") return lshape_case();
  throw ConfigError("unknown case '" + name + "' (expected smooth, cavity or lshape)");
}

Discretization discretize(const PolygonalMesh &mesh, const SpacePair &pair) {
  return {pair, build_space(mesh, pair.k, pair.target_u), build_space(mesh, pair.k_p, pair.target_p)};
}

ErrorReport error_norms(const PolygonalMesh &mesh, const ReconstructionBasis &basis_u,
                        const ReconstructionBasis &basis_p, const StokesSolution &solution,
                        const ManufacturedSolution &exact, bool with_pressure, int order) {
  const int n = static_cast<int>(mesh.num_cells());
  if (solution.U.size() != 2 * n || solution.P.size() != n)
    throw DomainError("error_norms: solution size does not match the mesh");
  const int k = std::max(basis_u.degree(), basis_p.degree());
  const int vol = std::min(order >= 0 ? order : 2 * k + 4, kMaxTriangleDegree);
  const int edge = std::min(vol + 1, kMaxEdgeDegree);

  const std::vector<double> ux(solution.U.data(), solution.U.data() + n);
  const std::vector<double> uy(solution.U.data() + n, solution.U.data() + 2 * n);
  const std::vector<double> pv(solution.P.data(), solution.P.data() + n);
  const auto fx = reconstruct(basis_u, ux);
  const auto fy = reconstruct(basis_u, uy);
  const auto fp = reconstruct(basis_p, pv);

  ErrorReport r;
  r.dofs = n;
  r.h = mesh.h();
  double l2 = 0.0, h1 = 0.0, jumps = 0.0;
  double ph_int = 0.0, p_int = 0.0, area = 0.0;
  for (int c = 0; c < n; ++c) {
    const auto q = cell_quadrature(mesh, c, vol);
    for (std::size_t i = 0; i < q.weights.size(); ++i) {
      const Point &x = q.points[i];
      const double w = q.weights[i];
      const Eigen::Vector2d e = Eigen::Vector2d(fx.value(c, x), fy.value(c, x)) - exact.u(x);
      Eigen::Matrix2d ge;
      ge.row(0) = fx.gradient(c, x).transpose();
      ge.row(1) = fy.gradient(c, x).transpose();
      ge -= exact.grad_u(x);
      l2 += w * e.squaredNorm();
      h1 += w * ge.squaredNorm();
      if (with_pressure && exact.p) {
        ph_int += w * fp.value(c, x);
        p_int += w * exact.p(x);
        area += w;
      }
    }
  }
  for (int i = 0; i < static_cast<int>(mesh.interior_edges().size()); ++i) {
    const auto &e = mesh.interior_edges()[i];
    const auto q = edge_quadrature(mesh, {false, i}, edge);
    for (std::size_t j = 0; j < q.weights.size(); ++j) {
      const Point &x = q.points[j];
      const Eigen::Vector2d d(fx.value(e.left, x) - fx.value(e.right, x), fy.value(e.left, x) - fy.value(e.right, x));
      jumps += q.weights[j] * d.squaredNorm() / e.length;
    }
  }
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i) {
    const auto &e = mesh.boundary_edges()[i];
    const auto q = edge_quadrature(mesh, {true, i}, edge);
    for (std::size_t j = 0; j < q.weights.size(); ++j) {
      const Point &x = q.points[j];
      const Eigen::Vector2d d = Eigen::Vector2d(fx.value(e.owner, x), fy.value(e.owner, x)) - exact.u(x);
      jumps += q.weights[j] * d.squaredNorm() / e.length;
    }
  }
  r.l2_velocity = std::sqrt(l2);
  r.dg_velocity = std::sqrt(h1 + jumps);

  if (with_pressure && exact.p) {
    const double shift = (ph_int - p_int) / area;
    double lp = 0.0;
    for (int c = 0; c < n; ++c) {
      const auto q = cell_quadrature(mesh, c, vol);
      for (std::size_t i = 0; i < q.weights.size(); ++i) {
        const double d = fp.value(c, q.points[i]) - exact.p(q.points[i]) - shift;
        lp += q.weights[i] * d * d;
      }
    }
    r.l2_pressure = std::sqrt(lp);
  } else {
    r.l2_pressure = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

InterpolationErrors interpolation_errors(const PolygonalMesh &mesh, const ReconstructionBasis &basis,
                                         const ScalarField &g, const std::function<Eigen::Vector2d(const Point &)> &grad_g,
                                         int order) {
  const int n = static_cast<int>(mesh.num_cells());
  const int vol = std::min(order >= 0 ? order : 2 * basis.degree() + 4, kMaxTriangleDegree);
  const int edge = std::min(vol + 1, kMaxEdgeDegree);
  std::vector<double> nodal(n);
  for (int c = 0; c < n; ++c) nodal[c] = g(mesh.barycenter(c));
  const auto field = reconstruct(basis, nodal);

  InterpolationErrors r;
  r.h = mesh.h();
  double l2 = 0.0, h1 = 0.0, jumps = 0.0;
  for (int c = 0; c < n; ++c) {
    const auto q = cell_quadrature(mesh, c, vol);
    for (std::size_t i = 0; i < q.weights.size(); ++i) {
      const Point &x = q.points[i];
      const double e = field.value(c, x) - g(x);
      l2 += q.weights[i] * e * e;
      h1 += q.weights[i] * (field.gradient(c, x) - grad_g(x)).squaredNorm();
      r.max = std::max(r.max, std::abs(e));
    }
  }
  for (int i = 0; i < static_cast<int>(mesh.interior_edges().size()); ++i) {
    const auto &e = mesh.interior_edges()[i];
    const auto q = edge_quadrature(mesh, {false, i}, edge);
    for (std::size_t j = 0; j < q.weights.size(); ++j) {
      const double d = field.value(e.left, q.points[j]) - field.value(e.right, q.points[j]);
      jumps += q.weights[j] * d * d / e.length;
    }
  }
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i) {
    const auto &e = mesh.boundary_edges()[i];
    const auto q = edge_quadrature(mesh, {true, i}, edge);
    for (std::size_t j = 0; j < q.weights.size(); ++j) {
      const double d = field.value(e.owner, q.points[j]) - g(q.points[j]);
      jumps += q.weights[j] * d * d / e.length;
    }
  }
  r.l2 = std::sqrt(l2);
  r.dg = std::sqrt(h1 + jumps);
  return r;
}

RunResult run_problem(const PolygonalMesh &mesh, const Discretization &disc, const StokesProblem &problem,
                      const DGConfig &config) {
  RunResult r;
  r.system = assemble_system(mesh, disc.basis_u, disc.basis_p, problem.f, problem.g, config);
  r.solution = solve_stokes(r.system);
  if (problem.exact) {
    r.errors = error_norms(mesh, disc.basis_u, disc.basis_p, r.solution, *problem.exact, problem.pressure_errors);
  }
  return r;
}

double loglog_slope(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size() || h.size() < 2) throw DomainError("loglog_slope: need >= 2 matching samples");
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> pairwise_orders(std::span<const double> h, std::span<const double> err) {
  std::vector<double> out;
  for (std::size_t i = 1; i < h.size(); ++i) out.push_back(std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]));
  return out;
}

namespace {

template <class Fn>
auto map_meshes(std::size_t count, int threads, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            slots[i].emplace(fn(i));
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

} // namespace

ConvergenceStudy convergence_study(const StokesProblem &problem, const SpacePair &pair,
                                   const std::vector<PolygonalMesh> &meshes, const DGConfig &config,
                                   int threads) {
  if (meshes.size() < 2) throw ConfigError("convergence_study: at least two meshes are required");
  if (!problem.exact) throw ConfigError("convergence_study: case '" + problem.name + "' has no exact solution");

  ConvergenceStudy study;
  study.pair = pair;
  study.reports = map_meshes(meshes.size(), threads, [&](std::size_t i) {
    try {
      const auto disc = discretize(meshes[i], pair);
      return *run_problem(meshes[i], disc, problem, config).errors;
    } catch (const Error &e) {
      throw SolverError("mesh " + std::to_string(i) + " (h = " + std::to_string(meshes[i].h()) + "): " + e.what());
    }
  });

  std::vector<double> h, eu, edg, ep;
  for (const auto &r : study.reports) {
    h.push_back(r.h);
    eu.push_back(r.l2_velocity);
    edg.push_back(r.dg_velocity);
    ep.push_back(r.l2_pressure);
  }
  study.slope_l2_u = loglog_slope(h, eu);
  study.slope_dg_u = loglog_slope(h, edg);
  study.order_l2_u = pairwise_orders(h, eu);
  study.order_dg_u = pairwise_orders(h, edg);
  if (problem.pressure_errors) {
    study.slope_l2_p = loglog_slope(h, ep);
    study.order_l2_p = pairwise_orders(h, ep);
  } else {
    study.slope_l2_p = std::numeric_limits<double>::quiet_NaN();
    study.order_l2_p.assign(h.size() - 1, std::numeric_limits<double>::quiet_NaN());
  }
  return study;
}

InfSupReport infsup_study(const SpacePair &pair, const std::vector<PolygonalMesh> &meshes, const DGConfig &config,
                          int threads) {
  InfSupReport report;
  report.pair = pair;
  try {
    auto results = map_meshes(meshes.size(), threads, [&](std::size_t i) {
      const auto disc = discretize(meshes[i], pair);
      const auto B = assemble_b(meshes[i], disc.basis_u, disc.basis_p, config);
      const auto norms = assemble_norm_matrices(meshes[i], disc.basis_u, disc.basis_p, config);
      return infsup_mu_min(B, norms.S, norms.T);
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
      InfSupEntry e;
      e.h = meshes[i].h();
      e.mu_min = results[i].mu_min;
      e.null_modes = results[i].null_modes;
      e.ratio = i == 0 ? std::numeric_limits<double>::quiet_NaN() : e.mu_min / report.entries.back().mu_min;
      report.entries.push_back(e);
    }
  } catch (const Error &e) {
    report.pass = false;
    report.diagnostics = e.what();
    return report;
  }

  report.pass = !report.entries.empty();
  for (std::size_t i = 1; i < report.entries.size(); ++i) {
    if (report.entries[i].ratio < kInfSupMinRatio) {
      report.pass = false;
      report.diagnostics += "ratio " + std::to_string(report.entries[i].ratio) + " below 0.8 at mesh " +
                            std::to_string(i) + "; ";
    }
  }
  if (!report.entries.empty() && report.entries.back().mu_min < kInfSupMinValue) {
    report.pass = false;
    report.diagnostics += "final mu_min " + std::to_string(report.entries.back().mu_min) + " below 0.01; ";
  }
  return report;
}

std::vector<LShapeRow> lshape_study(const SpacePair &pair, int base_n, int levels, const DGConfig &config,
                                    int threads) {
  std::vector<PolygonalMesh> meshes;
  meshes.push_back(generate_lshape_triangular(base_n));
  for (int l = 0; l < levels; ++l) meshes.push_back(refine_red(meshes.back()));
  const StokesProblem problem = lshape_case();

  auto reports = map_meshes(meshes.size(), threads, [&](std::size_t i) {
    const auto disc = discretize(meshes[i], pair);
    return *run_problem(meshes[i], disc, problem, config).errors;
  });
  std::vector<LShapeRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    LShapeRow row;
    row.dofs = reports[i].dofs;
    row.h = reports[i].h;
    row.l2_error = reports[i].l2_velocity;
    row.order = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : std::log(rows.back().l2_error / row.l2_error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
  }
  return rows;
}

} // namespace prfem
