#pragma once

#include "ivem/chart.hpp"
#include "ivem/mesh.hpp"
#include "ivem/sparse_solver.hpp"
#include "ivem/vem_element.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace ivem {

/// Global DOF numbering: vertex values, then the k-1 interior values of
/// each edge ordered from its lower to its higher vertex index, then the
/// cell moments. `cell_dofs[c][i]` is the global index of local DOF i.
struct DofMap {
  int k = 1;
  Index n_vertex_dofs = 0;
  Index n_edge_dofs = 0;
  Index n_moment_dofs = 0;
  Index n_dofs = 0;
  std::vector<std::vector<Index>> cell_dofs;

  /// Vertex and edge DOFs; moments follow them.
  Index n_skeleton() const { return n_vertex_dofs + n_edge_dofs; }
};

DofMap global_numbering(const PolyMesh& mesh, int k);

struct ProblemSpec {
  Chart chart = Chart::flat();
  Vec2 w_hat{0.0, 0.0};
  double gamma = 0.0;
  StabKind stab_kind = StabKind::DofiDofi;
  ScalarField forcing;   // empty means f = 0
  int quad_degree = -1;  // < 0 selects 2k + 4
};

struct AssemblyOptions {
  /// Eliminate the cell moments element by element; the global matrix
  /// then only couples vertex and edge DOFs.
  bool condense_moments = false;
  /// Cells per parallel batch; local matrices of one batch are buffered
  /// before their triplets are merged in cell order.
  Index batch_size = 1024;
};

/// Data needed to recover the moments of one cell after a condensed solve:
/// u_I = y - X u_B.
struct CellRecovery {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

struct GlobalSystem {
  Index n_dofs = 0;  // dimension of `matrix`
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<char> dirichlet_mask;
  Eigen::VectorXd dirichlet_values;
  DofMap dof_map;
  bool condensed = false;
  std::vector<CellRecovery> recovery;
};

/// Element loop in parallel batches; triplets are merged in cell order so
/// the result is bitwise identical to `assemble_reference`.
GlobalSystem assemble(const PolyMesh& mesh, int k, const ProblemSpec& problem,
                      const AssemblyOptions& options = {});

/// Single-threaded element loop.
GlobalSystem assemble_reference(const PolyMesh& mesh, int k, const ProblemSpec& problem,
                                const AssemblyOptions& options = {});

/// Positions of all boundary DOFs (boundary vertices and the interior nodes
/// of boundary edges) with their global indices.
std::vector<std::pair<Index, Vec2>> boundary_dof_nodes(const PolyMesh& mesh, const DofMap& map);

/// Sets boundary DOFs to g and eliminates them symmetrically: known columns
/// move to the right-hand side, constrained rows and columns become unit
/// rows.
void apply_dirichlet(GlobalSystem& system, const PolyMesh& mesh, const ScalarField& g);

struct SolveReport {
  double residual = 0.0;
  double cond_estimate = 0.0;
  double rcond = 0.0;
  double factor_ms = 0.0;
  int refinement_steps = 0;
};

struct DiscreteSolution {
  Eigen::VectorXd values;  // all DOFs, moments included
  const PolyMesh* mesh = nullptr;
  const Chart* chart = nullptr;
  int k = 1;
  DofMap dof_map;
  SolveReport report;
};

/// Direct solve; recovers condensed moments. Throws SolveError on a
/// residual above 1e-8 or non-finite values.
DiscreteSolution solve(const GlobalSystem& system, const PolyMesh& mesh, const Chart& chart,
                       bool estimate_condition = true);

/// One hemisphere: chart, forcing and exact Dirichlet data.
struct ChartProblem {
  ProblemSpec spec;
  ScalarField boundary;
};

/// Solves both hemispheres independently with exact interface data. The
/// returned solutions reference the given meshes and the charts inside the
/// problems, which must outlive them.
std::pair<DiscreteSolution, DiscreteSolution> solve_two_chart(
    const PolyMesh& mesh_north, const PolyMesh& mesh_south, int k, const ChartProblem& north,
    const ChartProblem& south, const AssemblyOptions& options = {});

}  // namespace ivem
