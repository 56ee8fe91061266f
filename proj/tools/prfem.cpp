// prfem: command-line driver for the patch-reconstruction Stokes solver.
//
//   prfem solve       --gen tri:10 --case smooth --k 2 --kp 1
//   prfem convergence --gen tri:10,20,40 --case smooth --k 2 --kp 2
//   prfem infsup      --gen tri:10,20,40 --pairs 1:1,2:1
//   prfem lshape      --pairs 2:1,2:2 --base 6 --levels 3
//
// Exit status: 0 success, 2 configuration or I/O error, 3 inf-sup FAIL,
// 4 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "prfem/analysis.hpp"
#include "prfem/error.hpp"
#include "prfem/io.hpp"

namespace {

using namespace prfem;

constexpr int kExitConfig = 2;
constexpr int kExitInfSupFail = 3;
constexpr int kExitNumerical = 4;

struct RunConfig {
  std::string command;
  std::vector<std::string> mesh_files;
  std::string gen;
  std::string case_name = "smooth";
  int k = 2;
  int kp = 1;
  std::string pairs;
  std::optional<int> target_u;
  std::optional<int> target_p;
  double mu = 10.0;
  int base = 6;
  int levels = 3;
  std::string out = ".";
  bool parallel = false;
};

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return v;
}

double to_double(const std::string &key, const std::string &value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw ConfigError(key + ": expected a number, got '" + value + "'");
  return v;
}

bool to_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

void set_key(RunConfig &cfg, const std::string &key, const std::string &value) {
  if (key == "mesh") cfg.mesh_files = split(value, ',');
  else if (key == "gen") cfg.gen = value;
  else if (key == "case") cfg.case_name = value;
  else if (key == "k") cfg.k = to_int(key, value);
  else if (key == "kp") cfg.kp = to_int(key, value);
  else if (key == "pairs") cfg.pairs = value;
  else if (key == "target_u") cfg.target_u = to_int(key, value);
  else if (key == "target_p") cfg.target_p = to_int(key, value);
  else if (key == "mu") cfg.mu = to_double(key, value);
  else if (key == "base") cfg.base = to_int(key, value);
  else if (key == "levels") cfg.levels = to_int(key, value);
  else if (key == "out") cfg.out = value;
  else if (key == "parallel") cfg.parallel = to_bool(key, value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

// Plain "key = value" lines; '#' starts a comment.
void load_config_file(RunConfig &cfg, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::vector<PolygonalMesh> generate_meshes(const std::string &gen) {
  const auto colon = gen.find(':');
  if (colon == std::string::npos) throw ConfigError("--gen: expected kind:n[,n...], got '" + gen + "'");
  const std::string kind = gen.substr(0, colon);
  const auto sizes = split(gen.substr(colon + 1), ',');
  std::vector<PolygonalMesh> out;
  for (const auto &s : sizes) {
    const int n = to_int("--gen", s);
    if (n < 1) throw ConfigError("--gen: mesh size must be positive");
    if (kind == "tri") out.push_back(generate_structured_triangular(n));
    else if (kind == "quad") out.push_back(generate_structured_quadrilateral(n));
    else if (kind == "lshape") out.push_back(generate_lshape_triangular(n));
    else throw ConfigError("--gen: unknown generator '" + kind + "' (expected tri, quad or lshape)");
  }
  return out;
}

std::vector<SpacePair> parse_pairs(const RunConfig &cfg, MeshKind kind) {
  std::vector<SpacePair> out;
  const std::string spec = cfg.pairs.empty() ? std::to_string(cfg.k) + ":" + std::to_string(cfg.kp) : cfg.pairs;
  for (const auto &item : split(spec, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("--pairs: expected k:kp, got '" + item + "'");
    const int k = to_int("--pairs", item.substr(0, colon));
    const int kp = to_int("--pairs", item.substr(colon + 1));
    if (k < 1 || k > 5 || kp < 0 || kp > 5) throw ConfigError("--pairs: degrees out of range in '" + item + "'");
    SpacePair p = SpacePair::with_defaults(k, kp, kind);
    if (cfg.target_u) p.target_u = *cfg.target_u;
    if (cfg.target_p) p.target_p = *cfg.target_p;
    out.push_back(p);
  }
  if (out.empty()) throw ConfigError("--pairs: no velocity/pressure pair given");
  return out;
}

void validate(const RunConfig &cfg) {
  if (!cfg.mesh_files.empty() && !cfg.gen.empty()) throw ConfigError("--mesh and --gen are mutually exclusive");
  for (const auto &f : cfg.mesh_files)
    if (!std::filesystem::exists(f)) throw ConfigError("mesh file '" + f + "' does not exist");
  if (cfg.command != "lshape" && cfg.mesh_files.empty() && cfg.gen.empty())
    throw ConfigError("no meshes given (use --mesh or --gen)");
  if (cfg.case_name != "smooth" && cfg.case_name != "cavity" && cfg.case_name != "lshape")
    throw ConfigError("unknown case '" + cfg.case_name + "' (expected smooth, cavity or lshape)");
  if (!(cfg.mu > 0.0)) throw ConfigError("mu must be positive");
  if (cfg.k < 1 || cfg.k > 5 || cfg.kp < 0 || cfg.kp > 5) throw ConfigError("k must be in 1..5 and kp in 0..5");
  if (cfg.target_u && *cfg.target_u < 1) throw ConfigError("target_u must be positive");
  if (cfg.target_p && *cfg.target_p < 1) throw ConfigError("target_p must be positive");
  if (cfg.command == "lshape" && (cfg.base < 1 || cfg.levels < 1))
    throw ConfigError("lshape needs base >= 1 and levels >= 1");
}

std::vector<PolygonalMesh> load_meshes(const RunConfig &cfg) {
  std::vector<PolygonalMesh> out;
  if (!cfg.gen.empty()) out = generate_meshes(cfg.gen);
  for (const auto &f : cfg.mesh_files) {
    try {
      out.push_back(load_msh_file(f));
    } catch (const MeshError &e) {
      throw ConfigError("mesh file '" + f + "': " + e.what());
    }
  }
  if (out.empty()) throw ConfigError("mesh list is empty");
  return out;
}

int thread_count(const RunConfig &cfg) {
  if (!cfg.parallel) return 1;
  if (const char *env = std::getenv("PRFEM_THREADS")) {
    const int n = to_int("PRFEM_THREADS", env);
    if (n < 1) throw ConfigError("PRFEM_THREADS must be positive");
    return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::ofstream open_output(const RunConfig &cfg, const std::string &name) {
  std::filesystem::create_directories(cfg.out);
  const auto path = std::filesystem::path(cfg.out) / name;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

DGConfig dg_config(const RunConfig &cfg) {
  DGConfig c;
  c.mu = cfg.mu;
  return c;
}

SpacePair single_pair(const RunConfig &cfg, MeshKind kind) {
  RunConfig c = cfg;
  c.pairs.clear();
  return parse_pairs(c, kind).front();
}

int cmd_solve(const RunConfig &cfg) {
  auto meshes = load_meshes(cfg);
  if (meshes.size() != 1) throw ConfigError("solve takes exactly one mesh");
  const PolygonalMesh &mesh = meshes.front();
  const StokesProblem problem = make_problem(cfg.case_name);
  const SpacePair pair = single_pair(cfg, classify_mesh(mesh));

  const Discretization disc = discretize(mesh, pair);
  const RunResult run = run_problem(mesh, disc, problem, dg_config(cfg));
  const double div = (run.system.B * run.solution.U - run.system.G).norm();

  std::cout << "case " << problem.name << ", pair " << pair_label(pair) << ", " << mesh.num_cells()
            << " cells, h = " << format_number(mesh.h()) << "\n";
  std::cout << "relative residual " << format_number(run.solution.residual_norm) << ", |BU - G| "
            << format_number(div) << "\n";
  {
    auto os = open_output(cfg, "solution.vtk");
    write_vtk(os, mesh, disc.basis_u, disc.basis_p, run.solution, "prfem " + problem.name + " " + pair_label(pair));
  }
  if (run.errors) {
    auto os = open_output(cfg, "errors.csv");
    write_errors_csv(os, {*run.errors});
    write_errors_csv(std::cout, {*run.errors});
  }
  return 0;
}

int cmd_convergence(const RunConfig &cfg) {
  const auto meshes = load_meshes(cfg);
  if (meshes.size() < 2) throw ConfigError("convergence needs at least two meshes");
  const StokesProblem problem = make_problem(cfg.case_name);
  if (!problem.exact) throw ConfigError("case '" + cfg.case_name + "' has no exact solution");
  const SpacePair pair = single_pair(cfg, classify_mesh(meshes.front()));

  const auto study = convergence_study(problem, pair, meshes, dg_config(cfg), thread_count(cfg));
  auto os = open_output(cfg, "convergence.csv");
  write_convergence_csv(os, study);
  write_convergence_csv(std::cout, study);
  std::cout << "slopes: l2_u " << format_number(study.slope_l2_u) << ", dg_u " << format_number(study.slope_dg_u)
            << ", l2_p " << format_number(study.slope_l2_p) << "\n";
  return 0;
}

int cmd_infsup(const RunConfig &cfg) {
  const auto meshes = load_meshes(cfg);
  const auto pairs = parse_pairs(cfg, classify_mesh(meshes.front()));
  std::vector<InfSupReport> reports;
  bool pass = true;
  for (const auto &p : pairs) {
    reports.push_back(infsup_study(p, meshes, dg_config(cfg), thread_count(cfg)));
    pass = pass && reports.back().pass;
    if (!reports.back().pass) std::cerr << "pair " << pair_label(p) << ": FAIL: " << reports.back().diagnostics << "\n";
  }
  auto os = open_output(cfg, "infsup.csv");
  write_infsup_csv(os, reports);
  write_infsup_csv(std::cout, reports);
  return pass ? 0 : kExitInfSupFail;
}

int cmd_lshape(const RunConfig &cfg) {
  RunConfig c = cfg;
  if (c.pairs.empty()) c.pairs = "2:1,2:2";
  const auto pairs = parse_pairs(c, MeshKind::triangular);
  auto os = open_output(cfg, "lshape.csv");
  bool header = true;
  for (const auto &p : pairs) {
    const auto rows = lshape_study(p, cfg.base, cfg.levels, dg_config(cfg), thread_count(cfg));
    write_lshape_csv(os, p, rows, header);
    write_lshape_csv(std::cout, p, rows, header);
    header = false;
  }
  return 0;
}

struct Flags {
  std::string config, mesh, gen, case_name, pairs, out;
  int k = 0, kp = 0, target_u = 0, target_p = 0, base = 0, levels = 0;
  double mu = 0.0;
  bool parallel = false;
};

void add_options(CLI::App *sub, Flags &f) {
  sub->add_option("--config", f.config, "key = value configuration file (flags override it)");
  sub->add_option("--mesh", f.mesh, "MSH 2.2 mesh file(s), comma separated");
  sub->add_option("--gen", f.gen, "generated meshes: tri:n[,n...], quad:n[,n...] or lshape:n");
  sub->add_option("--case", f.case_name, "smooth, cavity or lshape");
  sub->add_option("--k", f.k, "velocity degree");
  sub->add_option("--kp", f.kp, "pressure degree");
  sub->add_option("--pairs", f.pairs, "velocity:pressure degree pairs, e.g. 1:1,2:1");
  sub->add_option("--mu", f.mu, "penalty constant (eta = mu / h_e)");
  sub->add_option("--target-u", f.target_u, "velocity patch size #S(K)");
  sub->add_option("--target-p", f.target_p, "pressure patch size #S(K)");
  sub->add_option("--base", f.base, "L-shape base mesh parameter");
  sub->add_option("--levels", f.levels, "number of red refinements of the L-shape base mesh");
  sub->add_option("--out", f.out, "output directory");
  sub->add_flag("--parallel", f.parallel, "process independent meshes concurrently (PRFEM_THREADS sets the count)");
}

RunConfig build_config(CLI::App *sub, const Flags &f) {
  RunConfig cfg;
  cfg.command = sub->get_name();
  if (sub->count("--config")) load_config_file(cfg, f.config);
  if (sub->count("--mesh")) cfg.mesh_files = split(f.mesh, ',');
  if (sub->count("--gen")) cfg.gen = f.gen;
  if (sub->count("--case")) cfg.case_name = f.case_name;
  if (sub->count("--k")) cfg.k = f.k;
  if (sub->count("--kp")) cfg.kp = f.kp;
  if (sub->count("--pairs")) cfg.pairs = f.pairs;
  if (sub->count("--mu")) cfg.mu = f.mu;
  if (sub->count("--target-u")) cfg.target_u = f.target_u;
  if (sub->count("--target-p")) cfg.target_p = f.target_p;
  if (sub->count("--base")) cfg.base = f.base;
  if (sub->count("--levels")) cfg.levels = f.levels;
  if (sub->count("--out")) cfg.out = f.out;
  if (sub->count("--parallel")) cfg.parallel = true;
  return cfg;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Patch-reconstruction DG solver for the 2D Stokes problem"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<CLI::App *> subs = {
      app.add_subcommand("solve", "solve one case on one mesh; writes solution.vtk and errors.csv"),
      app.add_subcommand("convergence", "error study over a mesh sequence; writes convergence.csv"),
      app.add_subcommand("infsup", "inf-sup test over a mesh sequence; writes infsup.csv"),
      app.add_subcommand("lshape", "L-shape singular study on refined meshes; writes lshape.csv"),
  };
  for (auto *s : subs) add_options(s, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    CLI::App *sub = app.get_subcommands().front();
    const RunConfig cfg = build_config(sub, flags);
    validate(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "convergence") return cmd_convergence(cfg);
    if (cfg.command == "infsup") return cmd_infsup(cfg);
    return cmd_lshape(cfg);
  } catch (const ConfigError &e) {
    std::cerr << "prfem: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "prfem: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error &e) {
    std::cerr << "prfem: " << e.what() << "\n";
    return kExitNumerical;
  }
}
