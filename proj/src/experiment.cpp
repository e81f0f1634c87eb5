#include "ivem/experiment.hpp"

#include "ivem/assembly.hpp"
#include "ivem/errors.hpp"
#include "ivem/mesh_generation.hpp"
#include "ivem/mms.hpp"
#include "ivem/svg_plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace ivem {

namespace {

using json = nlohmann::json;

bool close_to(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); }

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// A failure annotated with the pipeline stage it came from.
struct StageFailure {
  std::string stage;
  std::exception_ptr error;
};

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (...) {
    throw StageFailure{stage, std::current_exception()};
  }
}

std::string describe(const std::exception_ptr& e, std::string& type) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    type = "ConfigError";
    return x.what();
  } catch (const GenerationError& x) {
    type = "GenerationError";
    return x.what();
  } catch (const SolveError& x) {
    type = "SolveError";
    return x.what();
  } catch (const SingularProjector& x) {
    type = "SingularProjector";
    return x.what();
  } catch (const Error& x) {
    type = "Error";
    return x.what();
  } catch (const std::exception& x) {
    type = "exception";
    return x.what();
  } catch (...) {
    type = "unknown";
    return "unknown failure";
  }
}

json to_json(const ExperimentConfig& c, bool with_execution) {
  json j;
  j["test_case"] = c.test_case;
  j["orders"] = c.orders;
  j["mesh_family"] = c.mesh_family;
  if (c.levels) j["levels"] = *c.levels;
  if (c.r) j["r"] = *c.r;
  if (c.a) j["a"] = *c.a;
  if (c.freq) j["freq"] = *c.freq;
  if (c.stab_kind) j["stab_kind"] = to_string(*c.stab_kind);
  j["w_hat"] = {c.w_hat.x(), c.w_hat.y()};
  j["gamma"] = c.gamma;
  j["seed"] = c.seed;
  if (with_execution) j["output_dir"] = c.output_dir;
  if (c.fit_last_n) j["fit_last_n"] = *c.fit_last_n;
  if (c.n_boundary_nodes) j["n_boundary_nodes"] = *c.n_boundary_nodes;
  j["cells"] = c.cells;
  j["lloyd_iterations"] = c.lloyd_iterations;
  j["condense"] = c.condense;
  if (with_execution) j["parallel_levels"] = c.parallel_levels;
  j["surface_weighted_errors"] = c.surface_weighted_errors;
  j["record_timings"] = c.record_timings;
  return j;
}

Chart surface_chart(const ExperimentConfig& c) {
  return Chart::monge_trig(*c.r, *c.a, *c.freq);
}

int boundary_nodes_at(const ExperimentConfig& c, int level) {
  return c.test_case == 2 ? *c.n_boundary_nodes << level : *c.n_boundary_nodes;
}

}  // namespace

ExperimentConfig resolve_config(const ExperimentConfig& in) {
  ExperimentConfig c = in;
  if (c.test_case < 1 || c.test_case > 4) {
    throw ConfigError("test_case must be 1, 2, 3 or 4, got " + std::to_string(c.test_case));
  }
  if (c.orders.empty()) throw ConfigError("orders must not be empty");
  std::set<int> seen;
  for (int k : c.orders) {
    if (k < 1 || k > kMaxOrder) throw ConfigError("orders must be in 1..4, got " + std::to_string(k));
    if (!seen.insert(k).second) throw ConfigError("order " + std::to_string(k) + " listed twice");
  }
  if (c.mesh_family.empty()) c.mesh_family = (c.test_case == 2 || c.test_case == 4) ? "poly" : "tri";
  if (c.mesh_family != "tri" && c.mesh_family != "poly") {
    throw ConfigError("mesh_family must be 'tri' or 'poly', got '" + c.mesh_family + "'");
  }
  if ((c.test_case == 2 || c.test_case == 4) && c.mesh_family != "poly") {
    throw ConfigError("test case " + std::to_string(c.test_case) + " uses polygonal meshes only");
  }
  switch (c.test_case) {
    case 1:
      if (!c.r) c.r = 1.1;
      if (!c.a) c.a = 0.0;
      if (!c.freq) c.freq = 5;
      if (*c.a != 0.0) throw ConfigError("test case 1 requires a = 0");
      if (!close_to(*c.r, 1.1) && !close_to(*c.r, 1.01) && !close_to(*c.r, 1.001)) {
        throw ConfigError("test case 1 requires r in {1.1, 1.01, 1.001}");
      }
      break;
    case 2:
      if (!c.r) c.r = 1.1;
      if (!c.a) c.a = 0.0;
      if (!c.freq) c.freq = 5;
      if (c.cells < 4) throw ConfigError("test case 2 needs at least 4 cells");
      break;
    case 3:
      if (!c.r) c.r = 2.0;
      if (!c.a) c.a = 0.5;
      if (!c.freq) c.freq = 5;
      if (!close_to(*c.r, 2.0) || *c.freq != 5) {
        throw ConfigError("test case 3 requires r = 2 and freq = 5");
      }
      if (!close_to(*c.a, 0.5) && !close_to(*c.a, 2.0)) {
        throw ConfigError("test case 3 requires a in {0.5, 2.0}");
      }
      break;
    case 4:
      if (c.r || c.a || c.freq) {
        throw ConfigError("test case 4 uses the fixed stereographic charts; r, a and freq are not accepted");
      }
      break;
  }
  if (c.test_case != 4) {
    try {
      (void)surface_chart(c);
    } catch (const Error& e) {
      throw ConfigError(std::string("invalid surface parameters: ") + e.what());
    }
  }
  const int default_levels[] = {4, 5, 6, 5};
  if (!c.levels) c.levels = default_levels[c.test_case - 1];
  if (*c.levels < 1 || *c.levels > 7) throw ConfigError("levels must be in 1..7");
  if (c.test_case == 2 && *c.levels > 6) throw ConfigError("test case 2 supports at most 6 levels");
  const int default_fit[] = {0, 0, 2, 3};
  if (!c.fit_last_n) c.fit_last_n = default_fit[c.test_case - 1];
  if (*c.fit_last_n < 0 || *c.fit_last_n == 1) {
    throw ConfigError("fit_last_n must be 0 (all points) or at least 2");
  }
  if (!c.n_boundary_nodes) c.n_boundary_nodes = c.test_case == 4 ? 32 : 8;
  if (*c.n_boundary_nodes < 4) throw ConfigError("n_boundary_nodes must be at least 4");
  if (c.lloyd_iterations < 0) throw ConfigError("lloyd_iterations must be non-negative");
  if (!std::isfinite(c.gamma) || !c.w_hat.allFinite()) {
    throw ConfigError("w_hat and gamma must be finite");
  }
  return c;
}

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "test_case", "orders", "mesh_family", "levels", "r", "a", "freq", "stab_kind", "w_hat",
      "gamma", "seed", "output_dir", "fit_last_n", "n_boundary_nodes", "cells",
      "lloyd_iterations", "condense", "parallel_levels", "surface_weighted_errors",
      "record_timings"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("test_case")) c.test_case = j["test_case"].get<int>();
    if (j.contains("orders")) c.orders = j["orders"].get<std::vector<int>>();
    if (j.contains("mesh_family")) c.mesh_family = j["mesh_family"].get<std::string>();
    if (j.contains("levels")) c.levels = j["levels"].get<int>();
    if (j.contains("r")) c.r = j["r"].get<double>();
    if (j.contains("a")) c.a = j["a"].get<double>();
    if (j.contains("freq")) c.freq = j["freq"].get<int>();
    if (j.contains("stab_kind")) c.stab_kind = stab_from_string(j["stab_kind"].get<std::string>());
    if (j.contains("w_hat")) {
      const auto w = j["w_hat"].get<std::vector<double>>();
      if (w.size() != 2) throw ConfigError("w_hat must have two entries");
      c.w_hat = Vec2(w[0], w[1]);
    }
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("fit_last_n")) c.fit_last_n = j["fit_last_n"].get<int>();
    if (j.contains("n_boundary_nodes")) c.n_boundary_nodes = j["n_boundary_nodes"].get<int>();
    if (j.contains("cells")) c.cells = j["cells"].get<Index>();
    if (j.contains("lloyd_iterations")) c.lloyd_iterations = j["lloyd_iterations"].get<int>();
    if (j.contains("condense")) c.condense = j["condense"].get<bool>();
    if (j.contains("parallel_levels")) c.parallel_levels = j["parallel_levels"].get<bool>();
    if (j.contains("surface_weighted_errors")) {
      c.surface_weighted_errors = j["surface_weighted_errors"].get<bool>();
    }
    if (j.contains("record_timings")) c.record_timings = j["record_timings"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config, true).dump(2); }

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string s = to_json(resolve_config(config), false).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

PolyMesh experiment_mesh(const ExperimentConfig& c, int level) {
  const int nb = boundary_nodes_at(c, level);
  switch (c.test_case) {
    case 2:
      return generate_voronoi_polymesh(DomainKind::QuarterDisk, c.cells, nb, c.seed,
                                       c.lloyd_iterations);
    case 4:
      return generate_voronoi_polymesh(DomainKind::UnitDisk, Index{100} << (2 * level), nb,
                                       c.seed + static_cast<std::uint64_t>(level),
                                       c.lloyd_iterations);
    default: {
      PolyMesh tri = generate_triangulation(DomainKind::QuarterDisk, level, nb);
      if (c.mesh_family == "tri") return tri;
      return generate_voronoi_polymesh(DomainKind::QuarterDisk, tri.n_cells(), nb,
                                       c.seed + static_cast<std::uint64_t>(level),
                                       c.lloyd_iterations);
    }
  }
}

std::string convergence_csv(const ExperimentResult& res) {
  std::string out =
      "test_case,mesh_family,k,level,h,n_cells,n_dofs,err_l2,err_h1,eoc_l2,eoc_h1,cond_estimate,"
      "runtime_ms,config_hash,mesh_checksum\n";
  const std::string hash = hex64(config_hash(res.config));
  for (const auto& r : res.rows) {
    out += std::to_string(r.test_case) + "," + r.mesh_family + "," + std::to_string(r.k) + "," +
           std::to_string(r.level) + "," + sci(r.h) + "," + std::to_string(r.n_cells) + "," +
           std::to_string(r.n_dofs) + "," + sci(r.err_l2) + "," + sci(r.err_h1) + "," +
           (r.eoc_l2 ? fixed(*r.eoc_l2, 4) : "") + "," + (r.eoc_h1 ? fixed(*r.eoc_h1, 4) : "") +
           "," + sci(r.cond_estimate) + "," + fixed(r.runtime_ms, 1) + "," + hash + "," +
           hex64(r.mesh_checksum) + "\n";
  }
  return out;
}

std::string regularity_csv(const ExperimentResult& res) {
  std::string out =
      "test_case,mesh_family,level,n_cells,n_boundary_nodes,h,rho_estimate,edge_ratio,"
      "min_edge_over_hP,all_star_shaped,mesh_checksum\n";
  for (const auto& r : res.regularity) {
    out += std::to_string(res.config.test_case) + "," + res.config.mesh_family + "," +
           std::to_string(r.level) + "," + std::to_string(r.n_cells) + "," +
           std::to_string(r.n_boundary_nodes) + "," + sci(r.h) + "," + sci(r.rho_estimate) + "," +
           sci(r.edge_ratio) + "," + sci(r.min_edge_over_hP) + "," +
           (r.all_star_shaped ? "true" : "false") + "," + hex64(r.mesh_checksum) + "\n";
  }
  return out;
}

namespace {

struct JobOutput {
  ExperimentRow row;
  double wall_ms = 0.0;
};

JobOutput run_job(const ExperimentConfig& c, const PolyMesh& mesh, int k, int level) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const StabKind stab = c.stab_kind.value_or(default_stabilization(k));
  AssemblyOptions aopt;
  aopt.condense_moments = c.condense;
  ErrorOptions eopt;
  eopt.surface_weighted = c.surface_weighted_errors;

  JobOutput out;
  ExperimentRow& row = out.row;
  row.test_case = c.test_case;
  row.mesh_family = c.mesh_family;
  row.k = k;
  row.level = level;
  row.h = mesh.h();
  row.n_cells = mesh.n_cells();
  row.mesh_checksum = mesh.checksum();

  const auto one_chart = [&](const ManufacturedCase& mc, double& cond) {
    const auto spec = mc.problem(stab);
    auto sys = in_stage("assemble", [&] { return assemble(mesh, k, spec, aopt); });
    in_stage("dirichlet", [&] {
      apply_dirichlet(sys, mesh, mc.u_field());
      return 0;
    });
    const auto sol = in_stage("solve", [&] { return solve(sys, mesh, mc.chart); });
    cond = std::max(cond, sol.report.cond_estimate);
    row.n_dofs += sol.dof_map.n_dofs;
    return in_stage("errors", [&] { return compute_errors(sol, mc, eopt); });
  };

  double cond = 0.0;
  if (c.test_case == 4) {
    const ManufacturedCase north{Chart::stereo_north(), c.w_hat, c.gamma};
    const ManufacturedCase south{Chart::stereo_south(), c.w_hat, c.gamma};
    const auto en = one_chart(north, cond);
    const auto es = one_chart(south, cond);
    row.err_l2_north = en.l2;
    row.err_l2_south = es.l2;
    row.err_l2 = std::hypot(en.l2, es.l2);
    row.err_h1 = std::hypot(en.h1, es.h1);
  } else {
    const ManufacturedCase mc{surface_chart(c), c.w_hat, c.gamma};
    const auto e = one_chart(mc, cond);
    row.err_l2 = e.l2;
    row.err_h1 = e.h1;
  }
  row.cond_estimate = cond;
  out.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  if (c.record_timings) row.runtime_ms = out.wall_ms;
  return out;
}

void write_error_report(const ExperimentConfig& c, const StageFailure& f) {
  std::string type;
  const std::string message = describe(f.error, type);
  json j;
  j["stage"] = f.stage;
  j["type"] = type;
  j["message"] = message;
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  std::ofstream(std::filesystem::path(c.output_dir) / "error.json") << j.dump(2) << "\n";
}

std::vector<PlotSeries> plot_series(const ExperimentResult& res, bool l2) {
  std::vector<PlotSeries> out;
  for (const auto& fit : res.fits) {
    PlotSeries s;
    s.label = "k=" + std::to_string(fit.k);
    for (const auto& r : res.rows) {
      if (r.k != fit.k) continue;
      s.x.push_back(r.h);
      s.y.push_back(l2 ? r.err_l2 : r.err_h1);
    }
    s.slope = l2 ? fit.slope_l2 : fit.slope_h1;
    const int n = static_cast<int>(s.x.size());
    const int w = *res.config.fit_last_n;
    s.fit_points = (w <= 0 || w > n) ? n : w;
    s.reference_slope = l2 ? fit.k + 1 : fit.k;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files) {
  ExperimentResult res;
  res.config = resolve_config(config);
  const ExperimentConfig& c = res.config;
  const int levels = *c.levels;
  try {
    std::vector<PolyMesh> meshes;
    for (int l = 0; l < levels; ++l) {
      meshes.push_back(in_stage("mesh", [&] { return experiment_mesh(c, l); }));
      const auto& m = meshes.back();
      const auto rep = regularity_report(m);
      res.regularity.push_back({l, m.n_cells(), boundary_nodes_at(c, l), m.h(), rep.rho_estimate,
                                rep.edge_ratio, rep.min_edge_over_hP, rep.all_star_shaped(),
                                m.checksum()});
    }

    std::vector<std::pair<int, int>> jobs;
    for (int k : c.orders) {
      for (int l = 0; l < levels; ++l) jobs.emplace_back(k, l);
    }
    std::vector<JobOutput> outputs(jobs.size());
    std::vector<std::optional<StageFailure>> failures(jobs.size());
    const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) if (c.parallel_levels)
    for (std::ptrdiff_t j = 0; j < n_jobs; ++j) {
      try {
        outputs[j] = run_job(c, meshes[jobs[j].second], jobs[j].first, jobs[j].second);
      } catch (const StageFailure& f) {
        failures[j] = f;
      } catch (...) {
        failures[j] = StageFailure{"run", std::current_exception()};
      }
    }
    for (const auto& f : failures) {
      if (f) throw *f;
    }
    for (const auto& o : outputs) res.rows.push_back(o.row);

    for (int k : c.orders) {
      std::vector<double> h, e0, e1;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < res.rows.size(); ++i) {
        if (res.rows[i].k != k) continue;
        idx.push_back(i);
        h.push_back(res.rows[i].h);
        e0.push_back(res.rows[i].err_l2);
        e1.push_back(res.rows[i].err_h1);
      }
      const auto rep = eoc_table(h, e0, e1);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        res.rows[idx[i]].eoc_l2 = rep.rows[i].eoc_l2;
        res.rows[idx[i]].eoc_h1 = rep.rows[i].eoc_h1;
      }
      OrderFit fit;
      fit.k = k;
      if (h.size() >= 2) {
        fit.slope_l2 = least_squares_slope(h, e0, *c.fit_last_n);
        fit.slope_h1 = least_squares_slope(h, e1, *c.fit_last_n);
      }
      res.fits.push_back(fit);
    }

    if (write_files) {
      const std::filesystem::path dir(c.output_dir);
      std::filesystem::create_directories(dir);
      write_text(dir / "convergence.csv", convergence_csv(res));
      write_text(dir / "regularity.csv", regularity_csv(res));
      const std::string tc = "test case " + std::to_string(c.test_case) + ", " + c.mesh_family;
      write_text(dir / "plot_l2.svg",
                 loglog_svg("L2 error, " + tc, "h", "L2 error", plot_series(res, true)));
      write_text(dir / "plot_h1.svg",
                 loglog_svg("H1 error, " + tc, "h", "H1 error", plot_series(res, false)));
      std::string timings = "k,level,runtime_ms\n";
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        timings += std::to_string(jobs[j].first) + "," + std::to_string(jobs[j].second) + "," +
                   fixed(outputs[j].wall_ms, 1) + "\n";
      }
      write_text(dir / "timings.csv", timings);
      std::filesystem::remove(dir / "error.json");
    }
  } catch (const StageFailure& f) {
    if (write_files) write_error_report(c, f);
    std::rethrow_exception(f.error);
  }
  return res;
}

}  // namespace ivem
