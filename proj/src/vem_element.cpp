#include "ivem/vem_element.hpp"

#include "ivem/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <string>

namespace ivem {

namespace {

// High-degree scaled monomials have tiny norms on thin cells; solving with the
// unit-diagonal form of H keeps Π0 accurate to near machine precision.
class EquilibratedLDLT {
 public:
  explicit EquilibratedLDLT(const Eigen::MatrixXd& H)
      : s_(H.diagonal().cwiseSqrt().cwiseInverse()),
        ldlt_(s_.asDiagonal() * H * s_.asDiagonal()) {}

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    return s_.asDiagonal() * ldlt_.solve(s_.asDiagonal() * rhs);
  }

 private:
  Eigen::VectorXd s_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// Row then column max-norm scaling before a pivoted LU.
Eigen::MatrixXd equilibrated_lu_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs) {
  const Eigen::VectorXd r = A.rowwise().lpNorm<Eigen::Infinity>().cwiseInverse();
  const Eigen::MatrixXd Ar = r.asDiagonal() * A;
  const Eigen::VectorXd c = Ar.colwise().lpNorm<Eigen::Infinity>().cwiseInverse().transpose();
  const Eigen::MatrixXd As = Ar * c.asDiagonal();
  return c.asDiagonal() * As.fullPivLu().solve(r.asDiagonal() * rhs);
}

}  // namespace

std::string to_string(StabKind kind) {
  return kind == StabKind::DofiDofi ? "dofi-dofi" : "d-recipe";
}

StabKind stab_from_string(std::string_view name) {
  if (name == "dofi-dofi" || name == "dofi_dofi" || name == "dofi" || name == "DofiDofi") {
    return StabKind::DofiDofi;
  }
  if (name == "d-recipe" || name == "d_recipe" || name == "drecipe" || name == "DRecipe") {
    return StabKind::DRecipe;
  }
  throw ConfigError("unknown stabilization '" + std::string(name) +
                    "' (expected dofi-dofi or d-recipe)");
}

StabKind default_stabilization(int k) { return k >= 3 ? StabKind::DRecipe : StabKind::DofiDofi; }

DofLayout dof_layout(std::span<const Vec2> cell, int k) {
  if (k < 1 || k > kMaxOrder) {
    throw UnsupportedOrder("VEM order must be in [1, 4], got " + std::to_string(k));
  }
  DofLayout L;
  L.k = k;
  L.n_vertex = static_cast<int>(cell.size());
  L.per_edge = k - 1;
  L.n_moment = ScaledMonomialBasis::dim(k - 2);
  L.total = L.n_vertex * k + L.n_moment;
  L.lobatto = gauss_lobatto_rule(k + 1);
  L.nodes.resize(static_cast<std::size_t>(L.n_vertex) * k);
  for (int v = 0; v < L.n_vertex; ++v) L.nodes[v] = cell[v];
  for (int e = 0; e < L.n_vertex; ++e) {
    const Vec2& a = cell[e];
    const Vec2& b = cell[(e + 1) % L.n_vertex];
    for (int s = 0; s < L.per_edge; ++s) {
      const double t = 0.5 * (L.lobatto.nodes[s + 1] + 1.0);
      L.nodes[L.edge_dof(e, s)] = (1.0 - t) * a + t * b;
    }
  }
  return L;
}

EllipticProjector elliptic_projector(std::span<const Vec2> cell, const DofLayout& layout,
                                     const ScaledMonomialBasis& basis, const Eigen::MatrixXd& H) {
  const int k = layout.k;
  const double area = polygon_geometry(cell).area;
  const int nk = basis.size();
  const int nd = layout.total;
  const int nv = layout.n_vertex;
  const Vec2 lw = basis.laplace_weights();

  EllipticProjector P;
  P.D.setZero(nd, nk);
  std::vector<double> v(nk), gx(nk), gy(nk);
  for (int i = 0; i < static_cast<int>(layout.nodes.size()); ++i) {
    basis.values(layout.nodes[i], v.data());
    for (int a = 0; a < nk; ++a) P.D(i, a) = v[a];
  }
  for (int m = 0; m < layout.n_moment; ++m) {
    P.D.row(layout.moment_dof(m)) = H.row(m) / area;
  }

  P.B.setZero(nk, nd);
  // Interior term -∫ Δm_α v from the moment DOFs.
  for (int a = 1; a < nk; ++a) {
    const auto [ex, ey] = basis.exponent(a);
    if (ex >= 2) {
      P.B(a, layout.moment_dof(ScaledMonomialBasis::index(ex - 2, ey))) -=
          area * ex * (ex - 1) * lw.x();
    }
    if (ey >= 2) {
      P.B(a, layout.moment_dof(ScaledMonomialBasis::index(ex, ey - 2))) -=
          area * ey * (ey - 1) * lw.y();
    }
  }
  // Boundary terms on Gauss-Lobatto nodes; row 0 holds ∫_∂P v.
  for (int e = 0; e < nv; ++e) {
    const Vec2& p0 = cell[e];
    const Vec2& p1 = cell[(e + 1) % nv];
    const Vec2 d = p1 - p0;
    const double len = d.norm();
    const Vec2 n(d.y() / len, -d.x() / len);
    for (int j = 0; j <= k; ++j) {
      const double t = 0.5 * (layout.lobatto.nodes[j] + 1.0);
      const double w = 0.5 * len * layout.lobatto.weights[j];
      basis.values_and_gradients((1.0 - t) * p0 + t * p1, v.data(), gx.data(), gy.data());
      const int dof = layout.edge_node_dof(e, j);
      P.B(0, dof) += w;
      for (int a = 1; a < nk; ++a) P.B(a, dof) += w * (gx[a] * n.x() + gy[a] * n.y());
    }
  }

  P.G = P.B * P.D;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P.G);
  const auto& sv = svd.singularValues();
  P.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                        : std::numeric_limits<double>::infinity();
  if (!(P.condition <= 1e14)) {
    throw SingularProjector("elliptic projector matrix is numerically singular (condition " +
                            std::to_string(P.condition) + ")");
  }
  P.Pi_nabla = equilibrated_lu_solve(P.G, P.B);
  return P;
}

L2Projectors l2_projectors(std::span<const Vec2> cell, const DofLayout& layout,
                           const ScaledMonomialBasis& basis, const EllipticProjector& ellip,
                           const Eigen::MatrixXd& H) {
  const int k = layout.k;
  const double area = polygon_geometry(cell).area;
  const int nk = basis.size();
  const int nk1 = ScaledMonomialBasis::dim(k - 1);
  const int nd = layout.total;
  const int nv = layout.n_vertex;
  const Eigen::Matrix2d& A = basis.frame();

  // Right-hand side ∫ v m_α: exact moments up to degree k-2, moments of
  // Π∇ v above (enhanced space).
  Eigen::MatrixXd C = H * ellip.Pi_nabla;
  for (int m = 0; m < layout.n_moment; ++m) {
    C.row(m).setZero();
    C(m, layout.moment_dof(m)) = area;
  }
  L2Projectors out;
  const EquilibratedLDLT Hk(H);
  out.Pi0_k = Hk.solve(C);
  const EquilibratedLDLT Hk1(H.topLeftCorner(nk1, nk1));
  out.Pi0_km1 = Hk1.solve(C.topRows(nk1));

  // ∫ ∂_c v m_α = -∫ v ∂_c m_α + ∫_∂P v m_α n_c, α in P_{k-1}.
  std::array<Eigen::MatrixXd, 2> E{Eigen::MatrixXd::Zero(nk1, nd), Eigen::MatrixXd::Zero(nk1, nd)};
  for (int a = 0; a < nk1; ++a) {
    const auto [ex, ey] = basis.exponent(a);
    // ∂_c m_α = A(0,c) ∂m_α/∂ξ₁ + A(1,c) ∂m_α/∂ξ₂.
    for (int c = 0; c < 2; ++c) {
      if (ex >= 1) {
        E[c](a, layout.moment_dof(ScaledMonomialBasis::index(ex - 1, ey))) -= area * ex * A(0, c);
      }
      if (ey >= 1) {
        E[c](a, layout.moment_dof(ScaledMonomialBasis::index(ex, ey - 1))) -= area * ey * A(1, c);
      }
    }
  }
  std::vector<double> v(nk);
  for (int e = 0; e < nv; ++e) {
    const Vec2& p0 = cell[e];
    const Vec2& p1 = cell[(e + 1) % nv];
    const Vec2 d = p1 - p0;
    const double len = d.norm();
    const Vec2 n(d.y() / len, -d.x() / len);
    for (int j = 0; j <= k; ++j) {
      const double t = 0.5 * (layout.lobatto.nodes[j] + 1.0);
      const double w = 0.5 * len * layout.lobatto.weights[j];
      basis.values((1.0 - t) * p0 + t * p1, v.data());
      const int dof = layout.edge_node_dof(e, j);
      for (int a = 0; a < nk1; ++a) {
        E[0](a, dof) += w * v[a] * n.x();
        E[1](a, dof) += w * v[a] * n.y();
      }
    }
  }
  out.Pi0_grad[0] = Hk1.solve(E[0]);
  out.Pi0_grad[1] = Hk1.solve(E[1]);
  return out;
}

LocalProjectors local_projectors(std::span<const Vec2> cell, int k, int quad_degree) {
  LocalProjectors P;
  P.k = k;
  P.vertices.assign(cell.begin(), cell.end());
  P.layout = dof_layout(cell, k);
  P.geometry = polygon_geometry(cell);
  P.basis = ScaledMonomialBasis::for_polygon(k, cell, P.geometry.centroid);
  P.rule = polygon_quadrature(cell, quad_degree < 0 ? 2 * k + 4 : quad_degree);
  P.H = monomial_mass_matrix(P.basis, P.rule);
  P.ellip = elliptic_projector(cell, P.layout, P.basis, P.H);
  P.l2 = l2_projectors(cell, P.layout, P.basis, P.ellip, P.H);
  return P;
}

Eigen::MatrixXd stabilization(const DofLayout& layout, const Eigen::MatrixXd& Pi_nabla,
                              const Eigen::MatrixXd& D, StabKind kind,
                              const Eigen::MatrixXd& consistency) {
  const int nd = layout.total;
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(nd, nd) - D * Pi_nabla;
  Eigen::MatrixXd S;
  if (kind == StabKind::DofiDofi) {
    // Moment DOF diagonals grow like inverse powers of the monomial norms, so
    // the scale comes from the boundary DOFs.
    const int nb = nd - layout.n_moment;
    const double tau = consistency.diagonal().head(nb).sum() / nb;
    S = tau * (R.transpose() * R);
  } else {
    const Eigen::VectorXd diag = consistency.diagonal();
    const double floor = 1e-12 * diag.maxCoeff();
    const Eigen::VectorXd d = diag.cwiseMax(floor);
    S = R.transpose() * d.asDiagonal() * R;
  }
  return 0.5 * (S + S.transpose());
}

LocalForms local_forms(const LocalProjectors& P, const Chart& chart, const Vec2& w_hat,
                       double gamma, StabKind stab_kind, const ScalarField& forcing) {
  const int nk1 = ScaledMonomialBasis::dim(P.k - 1);
  const auto nq = static_cast<Eigen::Index>(P.rule.size());
  Eigen::MatrixXd V(nq, nk1);
  Eigen::VectorXd wK1(nq), wK2(nq), ww1(nq), ww2(nq), wg(nq);
  std::vector<double> v(P.basis.size());
  const bool advect = w_hat.x() != 0.0 || w_hat.y() != 0.0;
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec2& x = P.rule.points[q];
    const double w = P.rule.weights[q];
    const auto c = pde_coefficients_at(chart, x, w_hat, gamma);
    P.basis.values(x, v.data());
    for (int a = 0; a < nk1; ++a) V(q, a) = v[a];
    wK1(q) = w * c.K.x();
    wK2(q) = w * c.K.y();
    ww1(q) = w * c.w_tilde.x();
    ww2(q) = w * c.w_tilde.y();
    wg(q) = w * c.gamma_tilde;
  }
  const auto weighted = [&](const Eigen::VectorXd& wt) -> Eigen::MatrixXd {
    return V.transpose() * wt.asDiagonal() * V;
  };
  const auto& G0 = P.l2.Pi0_grad[0];
  const auto& G1 = P.l2.Pi0_grad[1];
  const auto& Pm = P.l2.Pi0_km1;

  LocalForms F;
  F.stab_kind = stab_kind;
  F.consistency = G0.transpose() * weighted(wK1) * G0 + G1.transpose() * weighted(wK2) * G1;
  F.consistency = 0.5 * (F.consistency + F.consistency.transpose());
  F.S = stabilization(P.layout, P.ellip.Pi_nabla, P.ellip.D, stab_kind, F.consistency);
  F.A = F.consistency + F.S;
  const int nd = P.layout.total;
  if (advect) {
    F.Badv = Pm.transpose() * weighted(ww1) * G0 + Pm.transpose() * weighted(ww2) * G1;
  } else {
    F.Badv = Eigen::MatrixXd::Zero(nd, nd);
  }
  if (gamma != 0.0) {
    F.C = Pm.transpose() * weighted(wg) * Pm;
    F.C = 0.5 * (F.C + F.C.transpose());
  } else {
    F.C = Eigen::MatrixXd::Zero(nd, nd);
  }
  if (forcing) F.load = local_load(P, chart, forcing);
  return F;
}

LocalForms local_forms(std::span<const Vec2> cell, int k, const Chart& chart, const Vec2& w_hat,
                       double gamma, StabKind stab_kind) {
  return local_forms(local_projectors(cell, k), chart, w_hat, gamma, stab_kind);
}

Eigen::VectorXd local_load(const LocalProjectors& P, const Chart& chart,
                           const ScalarField& forcing) {
  const int nk = P.basis.size();
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(nk);
  std::vector<double> v(nk);
  for (std::size_t q = 0; q < P.rule.size(); ++q) {
    const Vec2& x = P.rule.points[q];
    const double f = forcing(x);
    if (f == 0.0) continue;
    const double s = P.rule.weights[q] * chart.metric_at(x).sqrt_det_g * f;
    P.basis.values(x, v.data());
    for (int a = 0; a < nk; ++a) moments(a) += s * v[a];
  }
  return P.l2.Pi0_k.transpose() * moments;
}

}  // namespace ivem
