#pragma once

#include "ivem/mesh.hpp"
#include "ivem/vem_element.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ivem {

/// One convergence study. Unset optionals take per-test-case defaults in
/// `resolve_config`.
struct ExperimentConfig {
  int test_case = 1;
  std::vector<int> orders{1, 2, 3, 4};
  std::string mesh_family;  // "tri" or "poly"; empty picks the test-case default
  std::optional<int> levels;
  std::optional<double> r;
  std::optional<double> a;
  std::optional<int> freq;
  std::optional<StabKind> stab_kind;  // default per order
  Vec2 w_hat{0.0, 0.0};
  double gamma = 0.0;
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  std::optional<int> fit_last_n;        // 0 = all points
  std::optional<int> n_boundary_nodes;  // level-0 count for test case 2
  Index cells = 25;                     // test case 2 set size
  int lloyd_iterations = 100;
  bool condense = true;
  bool parallel_levels = false;
  bool surface_weighted_errors = false;
  /// Fill runtime_ms; off by default so reruns give byte-identical CSVs.
  bool record_timings = false;
};

/// Applies defaults and checks test-case constraints. Throws ConfigError.
ExperimentConfig resolve_config(const ExperimentConfig& config);

ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
/// FNV-1a of the canonical JSON of the resolved config; output_dir and
/// parallel_levels do not change results and are excluded.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Mesh of one refinement level. Test case 4 returns the unit-disk mesh
/// shared by both hemispheres.
PolyMesh experiment_mesh(const ExperimentConfig& resolved, int level);

struct ExperimentRow {
  int test_case = 1;
  std::string mesh_family;
  int k = 1;
  int level = 0;
  double h = 0.0;
  Index n_cells = 0;
  Index n_dofs = 0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  std::optional<double> eoc_l2;
  std::optional<double> eoc_h1;
  double cond_estimate = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t mesh_checksum = 0;
  /// Test case 4: per-hemisphere L2 errors; err_l2 is their root sum of
  /// squares.
  double err_l2_north = 0.0;
  double err_l2_south = 0.0;
};

struct RegularityRow {
  int level = 0;
  Index n_cells = 0;
  int n_boundary_nodes = 0;
  double h = 0.0;
  double rho_estimate = 0.0;
  double edge_ratio = 0.0;
  double min_edge_over_hP = 0.0;
  bool all_star_shaped = false;
  std::uint64_t mesh_checksum = 0;
};

struct OrderFit {
  int k = 1;
  double slope_l2 = 0.0;
  double slope_h1 = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;  // resolved
  std::vector<ExperimentRow> rows;
  std::vector<RegularityRow> regularity;
  std::vector<OrderFit> fits;
};

/// Runs every (order, level) pair and, when write_files is set, writes
/// convergence.csv, regularity.csv, plot_l2.svg and plot_h1.svg (plus
/// timings.csv) into config.output_dir. On failure error.json records the
/// stage and message before the exception propagates.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true);

std::string convergence_csv(const ExperimentResult& result);
std::string regularity_csv(const ExperimentResult& result);

}  // namespace ivem
