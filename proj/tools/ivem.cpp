// Command-line driver: convergence studies, mesh export and mesh audits.

#include "ivem/errors.hpp"
#include "ivem/experiment.hpp"
#include "ivem/mesh_generation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ivem::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flags left unset do not touch the config loaded from file.
struct RunFlags {
  std::string config_file;
  std::optional<int> test_case, levels, freq, fit_last_n, n_boundary_nodes, lloyd_iterations;
  std::optional<std::vector<int>> orders;
  std::optional<std::string> mesh_family, stab_kind, output_dir;
  std::optional<double> r, a, gamma;
  std::optional<std::vector<double>> w_hat;
  std::optional<std::uint64_t> seed;
  std::optional<ivem::Index> cells;
  bool no_condense = false, parallel_levels = false, surface_weighted = false,
       record_timings = false, print_config = false;
};

void add_run_flags(CLI::App& run, RunFlags& f) {
  run.add_option("--config", f.config_file, "JSON config file");
  run.add_option("--test-case,--test_case", f.test_case, "test case 1..4");
  run.add_option("--orders", f.orders, "VEM orders, e.g. --orders 1 2 3 4")->delimiter(',');
  run.add_option("--mesh-family,--mesh_family", f.mesh_family, "tri or poly");
  run.add_option("--levels", f.levels, "number of refinement levels");
  run.add_option("-r,--r", f.r, "Monge radius parameter");
  run.add_option("-a,--a", f.a, "oscillation amplitude");
  run.add_option("--freq", f.freq, "oscillation frequency");
  run.add_option("--stab-kind,--stab_kind", f.stab_kind, "dofi_dofi or d_recipe");
  run.add_option("--w-hat,--w_hat", f.w_hat, "advection field in the orthonormal frame")
      ->expected(2);
  run.add_option("--gamma", f.gamma, "reaction coefficient");
  run.add_option("--seed", f.seed, "mesh generator seed");
  run.add_option("--output-dir,--output_dir", f.output_dir, "output directory");
  run.add_option("--fit-last-n,--fit_last_n", f.fit_last_n, "slope fit window, 0 = all levels");
  run.add_option("--n-boundary-nodes,--n_boundary_nodes", f.n_boundary_nodes,
                 "boundary nodes (level-0 count for test case 2)");
  run.add_option("--cells", f.cells, "cell count of the test case 2 set");
  run.add_option("--lloyd-iterations,--lloyd_iterations", f.lloyd_iterations,
                 "Lloyd iterations for Voronoi meshes");
  run.add_flag("--no-condense", f.no_condense, "keep cell moments in the global system");
  run.add_flag("--parallel-levels,--parallel_levels", f.parallel_levels,
               "run (order, level) jobs concurrently");
  run.add_flag("--surface-weighted-errors,--surface_weighted_errors", f.surface_weighted,
               "weight error norms by the area element");
  run.add_flag("--record-timings,--record_timings", f.record_timings,
               "write wall times into convergence.csv");
  run.add_flag("--print-config", f.print_config, "print the resolved config and exit");
}

ivem::ExperimentConfig build_config(const RunFlags& f) {
  ivem::ExperimentConfig c;
  if (!f.config_file.empty()) c = ivem::parse_config_json(read_file(f.config_file));
  if (const char* env = std::getenv("IVEM_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    c.output_dir = env;
  }
  if (f.test_case) c.test_case = *f.test_case;
  if (f.orders) c.orders = *f.orders;
  if (f.mesh_family) c.mesh_family = *f.mesh_family;
  if (f.levels) c.levels = f.levels;
  if (f.r) c.r = f.r;
  if (f.a) c.a = f.a;
  if (f.freq) c.freq = f.freq;
  if (f.stab_kind) c.stab_kind = ivem::stab_from_string(*f.stab_kind);
  if (f.w_hat) c.w_hat = ivem::Vec2((*f.w_hat)[0], (*f.w_hat)[1]);
  if (f.gamma) c.gamma = *f.gamma;
  if (f.seed) c.seed = *f.seed;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.fit_last_n) c.fit_last_n = f.fit_last_n;
  if (f.n_boundary_nodes) c.n_boundary_nodes = f.n_boundary_nodes;
  if (f.cells) c.cells = *f.cells;
  if (f.lloyd_iterations) c.lloyd_iterations = *f.lloyd_iterations;
  if (f.no_condense) c.condense = false;
  if (f.parallel_levels) c.parallel_levels = true;
  if (f.surface_weighted) c.surface_weighted_errors = true;
  if (f.record_timings) c.record_timings = true;
  return c;
}

void print_summary(const ivem::ExperimentResult& res) {
  std::printf("%-3s %-5s %-12s %-8s %-8s %-12s %-7s %-12s %-7s\n", "k", "level", "h", "cells",
              "dofs", "err_l2", "eoc", "err_h1", "eoc");
  for (const auto& r : res.rows) {
    const auto eoc = [](const std::optional<double>& v) {
      char buf[16];
      if (v) std::snprintf(buf, sizeof buf, "%.3f", *v);
      else std::snprintf(buf, sizeof buf, "-");
      return std::string(buf);
    };
    std::printf("%-3d %-5d %-12.4e %-8lld %-8lld %-12.4e %-7s %-12.4e %-7s\n", r.k, r.level, r.h,
                static_cast<long long>(r.n_cells), static_cast<long long>(r.n_dofs), r.err_l2,
                eoc(r.eoc_l2).c_str(), r.err_h1, eoc(r.eoc_h1).c_str());
  }
  for (const auto& fit : res.fits) {
    std::printf("k=%d  fitted slope  L2 %.3f  H1 %.3f\n", fit.k, fit.slope_l2, fit.slope_h1);
  }
}

struct MeshFlags {
  std::string domain = "quarter_disk";
  std::string family = "tri";
  int level = 0;
  int nodes = 8;
  ivem::Index cells = 25;
  std::uint64_t seed = 1;
  int lloyd = 100;
  std::string output;
};

void print_audit(const ivem::PolyMesh& mesh) {
  const auto rep = ivem::regularity_report(mesh);
  std::printf("vertices          %lld\n", static_cast<long long>(mesh.n_vertices()));
  std::printf("cells             %lld\n", static_cast<long long>(mesh.n_cells()));
  std::printf("edges             %lld\n", static_cast<long long>(mesh.n_edges()));
  std::printf("h                 %.6e\n", mesh.h());
  std::printf("area              %.12f\n", mesh.total_area());
  std::printf("rho_estimate      %.6f\n", rep.rho_estimate);
  std::printf("edge_ratio        %.6f\n", rep.edge_ratio);
  std::printf("min_edge_over_hP  %.6f\n", rep.min_edge_over_hP);
  std::printf("all_star_shaped   %s\n", rep.all_star_shaped() ? "true" : "false");
  std::printf("checksum          %016llx\n", static_cast<unsigned long long>(mesh.checksum()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element solver for advection-diffusion-reaction problems on surfaces"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run a convergence study and write CSV and SVG output");
  add_run_flags(*run, run_flags);

  MeshFlags mesh_flags;
  auto* mesh = app.add_subcommand("mesh", "generate a mesh and write it as JSON");
  mesh->add_option("--domain", mesh_flags.domain, "quarter_disk, unit_disk or unit_square");
  mesh->add_option("--family", mesh_flags.family, "tri or poly");
  mesh->add_option("--level", mesh_flags.level, "triangulation level");
  mesh->add_option("--nodes", mesh_flags.nodes, "boundary nodes");
  mesh->add_option("--cells", mesh_flags.cells, "Voronoi cell count");
  mesh->add_option("--seed", mesh_flags.seed, "Voronoi seed");
  mesh->add_option("--lloyd-iterations", mesh_flags.lloyd, "Lloyd iterations");
  mesh->add_option("-o,--output", mesh_flags.output, "output file")->required();

  std::string audit_path;
  auto* audit = app.add_subcommand("audit", "print topology and regularity figures of a mesh file");
  audit->add_option("mesh", audit_path, "mesh JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const auto config = build_config(run_flags);
      if (run_flags.print_config) {
        std::cout << ivem::config_to_json(ivem::resolve_config(config)) << "\n";
        return 0;
      }
      const auto res = ivem::run_experiment(config);
      print_summary(res);
      std::printf("output written to %s\n", res.config.output_dir.c_str());
    } else if (mesh->parsed()) {
      const auto domain = ivem::domain_from_string(mesh_flags.domain);
      ivem::PolyMesh m;
      if (mesh_flags.family == "tri") {
        m = ivem::generate_triangulation(domain, mesh_flags.level, mesh_flags.nodes);
      } else if (mesh_flags.family == "poly") {
        m = ivem::generate_voronoi_polymesh(domain, mesh_flags.cells, mesh_flags.nodes,
                                            mesh_flags.seed, mesh_flags.lloyd);
      } else {
        throw ivem::ConfigError("family must be 'tri' or 'poly'");
      }
      ivem::export_mesh(m, mesh_flags.output);
      print_audit(m);
    } else if (audit->parsed()) {
      print_audit(ivem::import_mesh(audit_path));
    }
  } catch (const ivem::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ivem::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitConfig;
  } catch (const ivem::TopologyError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitConfig;
  } catch (const ivem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
