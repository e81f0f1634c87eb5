#pragma once

#include "ivem/chart.hpp"
#include "ivem/mesh.hpp"
#include "ivem/monomials.hpp"
#include "ivem/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ivem {

using ScalarField = std::function<double(const Vec2&)>;

inline constexpr int kMaxOrder = 4;

enum class StabKind { DofiDofi, DRecipe };

std::string to_string(StabKind kind);
StabKind stab_from_string(std::string_view name);
/// D-recipe for k >= 3, dofi-dofi below.
StabKind default_stabilization(int k);

/// Local DOF ordering: vertex values, then the k-1 interior Gauss-Lobatto
/// values of each edge (edge e runs from vertex e to vertex e+1), then the
/// scaled moments (1/|P|)∫ v m_α for m_α of degree <= k-2.
struct DofLayout {
  int k = 1;
  int n_vertex = 0;
  int per_edge = 0;
  int n_moment = 0;
  int total = 0;
  /// Reference Gauss-Lobatto nodes on [-1, 1] (k+1 of them).
  Rule1D lobatto;
  /// Positions of the vertex and edge DOFs, in DOF order.
  std::vector<Vec2> nodes;

  int vertex_dof(int v) const { return v; }
  int edge_dof(int e, int slot) const { return n_vertex + e * per_edge + slot; }
  int moment_dof(int alpha) const { return n_vertex * (1 + per_edge) + alpha; }
  /// DOF sitting at Gauss-Lobatto node j (0..k) of edge e.
  int edge_node_dof(int e, int j) const {
    if (j == 0) return e;
    if (j == k) return (e + 1) % n_vertex;
    return edge_dof(e, j - 1);
  }
};

/// Throws UnsupportedOrder unless 1 <= k <= 4.
DofLayout dof_layout(std::span<const Vec2> cell, int k);

struct EllipticProjector {
  Eigen::MatrixXd D;         // n_dofs x dim P_k: DOFs of each monomial
  Eigen::MatrixXd B;         // dim P_k x n_dofs
  Eigen::MatrixXd G;         // B * D
  Eigen::MatrixXd Pi_nabla;  // G^{-1} B
  double condition = 1.0;
};

/// H is the mass matrix of the degree-k basis on the cell.
EllipticProjector elliptic_projector(std::span<const Vec2> cell, const DofLayout& layout,
                                     const ScaledMonomialBasis& basis, const Eigen::MatrixXd& H);

struct L2Projectors {
  Eigen::MatrixXd Pi0_k;                   // dim P_k x n_dofs
  Eigen::MatrixXd Pi0_km1;                 // dim P_{k-1} x n_dofs
  std::array<Eigen::MatrixXd, 2> Pi0_grad;  // components of Π0_{k-1}∇, dim P_{k-1} x n_dofs
};

L2Projectors l2_projectors(std::span<const Vec2> cell, const DofLayout& layout,
                           const ScaledMonomialBasis& basis, const EllipticProjector& ellip,
                           const Eigen::MatrixXd& H);

/// Everything an element needs that does not depend on the PDE data.
struct LocalProjectors {
  int k = 1;
  std::vector<Vec2> vertices;
  PolygonGeometry geometry;
  ScaledMonomialBasis basis{0, Vec2::Zero(), 1.0};
  DofLayout layout;
  QuadratureRule rule;
  Eigen::MatrixXd H;
  EllipticProjector ellip;
  L2Projectors l2;
};

/// quad_degree < 0 selects 2k + 4.
LocalProjectors local_projectors(std::span<const Vec2> cell, int k, int quad_degree = -1);

/// Stabilizing form acting on (I - D Π∇). `consistency` is the consistency
/// matrix used for the scaling.
Eigen::MatrixXd stabilization(const DofLayout& layout, const Eigen::MatrixXd& Pi_nabla,
                              const Eigen::MatrixXd& D, StabKind kind,
                              const Eigen::MatrixXd& consistency);

struct LocalForms {
  Eigen::MatrixXd consistency;
  Eigen::MatrixXd S;
  Eigen::MatrixXd A;  // consistency + S
  Eigen::MatrixXd Badv;
  Eigen::MatrixXd C;
  Eigen::VectorXd load;  // empty unless a forcing was given
  StabKind stab_kind = StabKind::DofiDofi;
};

LocalForms local_forms(const LocalProjectors& proj, const Chart& chart, const Vec2& w_hat,
                       double gamma, StabKind stab_kind, const ScalarField& forcing = {});

LocalForms local_forms(std::span<const Vec2> cell, int k, const Chart& chart, const Vec2& w_hat,
                       double gamma, StabKind stab_kind);

/// load_i = ∫ sqrt(det G) f Π0_k φ_i.
Eigen::VectorXd local_load(const LocalProjectors& proj, const Chart& chart,
                           const ScalarField& forcing);

}  // namespace ivem
