#include "ivem/assembly.hpp"

#include "ivem/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

namespace ivem {

DofMap global_numbering(const PolyMesh& mesh, int k) {
  if (k < 1 || k > kMaxOrder) {
    throw UnsupportedOrder("VEM order must be in [1, 4], got " + std::to_string(k));
  }
  DofMap map;
  map.k = k;
  map.n_vertex_dofs = mesh.n_vertices();
  map.n_edge_dofs = mesh.n_edges() * (k - 1);
  const Index per_cell = ScaledMonomialBasis::dim(k - 2);
  map.n_moment_dofs = mesh.n_cells() * per_cell;
  map.n_dofs = map.n_vertex_dofs + map.n_edge_dofs + map.n_moment_dofs;
  map.cell_dofs.resize(mesh.n_cells());
  const Index edge_base = map.n_vertex_dofs;
  const Index moment_base = map.n_skeleton();
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    const Index nv = static_cast<Index>(cell.size());
    auto& dofs = map.cell_dofs[c];
    dofs.resize(nv * k + per_cell);
    for (Index i = 0; i < nv; ++i) dofs[i] = cell[i];
    for (Index e = 0; e < nv; ++e) {
      const Index g = mesh.cell_edge(c, e);
      const bool forward = mesh.cell_edge_forward(c, e);
      for (int s = 0; s < k - 1; ++s) {
        const int gs = forward ? s : k - 2 - s;
        dofs[nv + e * (k - 1) + s] = edge_base + g * (k - 1) + gs;
      }
    }
    for (Index m = 0; m < per_cell; ++m) dofs[nv * k + m] = moment_base + c * per_cell + m;
  }
  return map;
}

namespace {

struct LocalSystem {
  Eigen::MatrixXd K;
  Eigen::VectorXd f;
  CellRecovery recovery;
};

LocalSystem build_local(const PolyMesh& mesh, Index c, int k, const ProblemSpec& problem,
                        bool condense) {
  const auto verts = mesh.cell_vertices(c);
  const auto proj = local_projectors(verts, k, problem.quad_degree);
  const auto forms =
      local_forms(proj, problem.chart, problem.w_hat, problem.gamma, problem.stab_kind);
  LocalSystem L;
  L.K = forms.A + forms.Badv + forms.C;
  L.f = problem.forcing ? local_load(proj, problem.chart, problem.forcing)
                        : Eigen::VectorXd::Zero(proj.layout.total);
  const int ni = proj.layout.n_moment;
  if (condense && ni > 0) {
    const int nb = proj.layout.total - ni;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(L.K.bottomRightCorner(ni, ni));
    L.recovery.X = lu.solve(L.K.bottomLeftCorner(ni, nb));
    L.recovery.y = lu.solve(L.f.tail(ni));
    const Eigen::MatrixXd Kc =
        L.K.topLeftCorner(nb, nb) - L.K.topRightCorner(nb, ni) * L.recovery.X;
    const Eigen::VectorXd fc = L.f.head(nb) - L.K.topRightCorner(nb, ni) * L.recovery.y;
    L.K = Kc;
    L.f = fc;
  }
  return L;
}

GlobalSystem assemble_impl(const PolyMesh& mesh, int k, const ProblemSpec& problem,
                           const AssemblyOptions& options, bool parallel) {
  GlobalSystem sys;
  sys.dof_map = global_numbering(mesh, k);
  const bool condense = options.condense_moments && k >= 2;
  sys.condensed = condense;
  sys.n_dofs = condense ? sys.dof_map.n_skeleton() : sys.dof_map.n_dofs;
  sys.rhs = Eigen::VectorXd::Zero(sys.n_dofs);
  if (condense) sys.recovery.resize(mesh.n_cells());

  const Index nc = mesh.n_cells();
  const Index batch = std::max<Index>(1, options.batch_size);
  std::vector<Eigen::Triplet<double, int>> triplets;
  {
    Index estimate = 0;
    for (Index c = 0; c < nc; ++c) {
      const Index n = condense ? static_cast<Index>(mesh.cells()[c].size()) * k
                               : static_cast<Index>(sys.dof_map.cell_dofs[c].size());
      estimate += n * n;
    }
    triplets.reserve(static_cast<std::size_t>(estimate));
  }

  std::vector<LocalSystem> locals;
  std::vector<std::exception_ptr> errors;
  for (Index start = 0; start < nc; start += batch) {
    const Index stop = std::min(nc, start + batch);
    const Index n = stop - start;
    locals.assign(n, LocalSystem{});
    errors.assign(n, nullptr);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (Index c = start; c < stop; ++c) {
      try {
        locals[c - start] = build_local(mesh, c, k, problem, condense);
      } catch (...) {
        errors[c - start] = std::current_exception();
      }
    }
    for (Index c = start; c < stop; ++c) {
      if (errors[c - start]) rethrow_with_context(errors[c - start], "cell " + std::to_string(c) + ": ");
      auto& L = locals[c - start];
      const auto& dofs = sys.dof_map.cell_dofs[c];
      const Index m = L.K.rows();
      for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
          triplets.emplace_back(static_cast<int>(dofs[i]), static_cast<int>(dofs[j]), L.K(i, j));
        }
        sys.rhs(dofs[j]) += L.f(j);
      }
      if (condense) sys.recovery[c] = std::move(L.recovery);
    }
  }
  sys.matrix.resize(sys.n_dofs, sys.n_dofs);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  sys.dirichlet_mask.assign(sys.n_dofs, 0);
  sys.dirichlet_values = Eigen::VectorXd::Zero(sys.n_dofs);
  return sys;
}

}  // namespace

GlobalSystem assemble(const PolyMesh& mesh, int k, const ProblemSpec& problem,
                      const AssemblyOptions& options) {
  return assemble_impl(mesh, k, problem, options, true);
}

GlobalSystem assemble_reference(const PolyMesh& mesh, int k, const ProblemSpec& problem,
                                const AssemblyOptions& options) {
  return assemble_impl(mesh, k, problem, options, false);
}

std::vector<std::pair<Index, Vec2>> boundary_dof_nodes(const PolyMesh& mesh, const DofMap& map) {
  std::vector<std::pair<Index, Vec2>> out;
  std::vector<char> on_boundary(mesh.n_vertices(), 0);
  for (Index v = 0; v < mesh.n_vertices(); ++v) on_boundary[v] = mesh.boundary_vertex_flags()[v];
  for (const auto& e : mesh.edges()) {
    if (e.on_boundary()) on_boundary[e.v[0]] = on_boundary[e.v[1]] = 1;
  }
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    if (on_boundary[v]) out.emplace_back(v, mesh.vertices()[v]);
  }
  const int k = map.k;
  if (k >= 2) {
    const Rule1D gl = gauss_lobatto_rule(k + 1);
    for (Index g = 0; g < mesh.n_edges(); ++g) {
      const auto& e = mesh.edges()[g];
      if (!e.on_boundary()) continue;
      const Vec2& p0 = mesh.vertices()[e.v[0]];
      const Vec2& p1 = mesh.vertices()[e.v[1]];
      for (int s = 0; s < k - 1; ++s) {
        const double t = 0.5 * (gl.nodes[s + 1] + 1.0);
        out.emplace_back(map.n_vertex_dofs + g * (k - 1) + s, (1.0 - t) * p0 + t * p1);
      }
    }
  }
  return out;
}

void apply_dirichlet(GlobalSystem& sys, const PolyMesh& mesh, const ScalarField& g) {
  for (const auto& [dof, x] : boundary_dof_nodes(mesh, sys.dof_map)) {
    sys.dirichlet_mask[dof] = 1;
    sys.dirichlet_values(dof) = g ? g(x) : 0.0;
  }
  const auto& mask = sys.dirichlet_mask;
  auto& A = sys.matrix;
  for (int j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      const Index i = it.row();
      if (mask[j] && !mask[i]) sys.rhs(i) -= it.value() * sys.dirichlet_values(j);
      if (mask[i] || mask[j]) it.valueRef() = (i == j) ? 1.0 : 0.0;
    }
  }
  for (Index i = 0; i < sys.n_dofs; ++i) {
    if (mask[i]) sys.rhs(i) = sys.dirichlet_values(i);
  }
  // A masked DOF whose diagonal was never stored still needs its unit entry.
  for (Index i = 0; i < sys.n_dofs; ++i) {
    if (mask[i] && A.coeff(i, i) != 1.0) A.coeffRef(i, i) = 1.0;
  }
  A.prune([](Index, Index, double v) { return v != 0.0; });
  A.makeCompressed();
}

DiscreteSolution solve(const GlobalSystem& sys, const PolyMesh& mesh, const Chart& chart,
                       bool estimate_condition) {
  const auto result = solve_sparse(sys.matrix, sys.rhs, estimate_condition);
  DiscreteSolution sol;
  sol.mesh = &mesh;
  sol.chart = &chart;
  sol.k = sys.dof_map.k;
  sol.dof_map = sys.dof_map;
  sol.report.residual = result.residual;
  sol.report.cond_estimate = result.cond_estimate;
  sol.report.rcond = result.rcond;
  sol.report.factor_ms = result.factor_ms;
  sol.report.refinement_steps = result.refinement_steps;
  if (!sys.condensed) {
    sol.values = result.x;
  } else {
    sol.values = Eigen::VectorXd::Zero(sys.dof_map.n_dofs);
    sol.values.head(sys.n_dofs) = result.x;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
      const auto& dofs = sys.dof_map.cell_dofs[c];
      const auto& R = sys.recovery[c];
      const Index ni = R.y.size();
      const Index nb = static_cast<Index>(dofs.size()) - ni;
      Eigen::VectorXd ub(nb);
      for (Index i = 0; i < nb; ++i) ub(i) = result.x(dofs[i]);
      const Eigen::VectorXd ui = R.y - R.X * ub;
      for (Index i = 0; i < ni; ++i) sol.values(dofs[nb + i]) = ui(i);
    }
  }
  if (!sol.values.allFinite()) throw SolveError("solution contains non-finite values");
  return sol;
}

std::pair<DiscreteSolution, DiscreteSolution> solve_two_chart(
    const PolyMesh& mesh_north, const PolyMesh& mesh_south, int k, const ChartProblem& north,
    const ChartProblem& south, const AssemblyOptions& options) {
  const auto one = [&](const PolyMesh& mesh, const ChartProblem& p) {
    auto sys = assemble(mesh, k, p.spec, options);
    apply_dirichlet(sys, mesh, p.boundary);
    return solve(sys, mesh, p.spec.chart);
  };
  auto n = one(mesh_north, north);
  auto s = one(mesh_south, south);
  return {std::move(n), std::move(s)};
}

}  // namespace ivem
