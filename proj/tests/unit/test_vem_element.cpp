#include "ivem/errors.hpp"
#include "ivem/vem_element.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace ivem;

namespace {

const std::vector<Vec2> kUnitSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
const std::vector<Vec2> kTriangle{{0, 0}, {1, 0}, {0.2, 0.8}};
// Cells handed to the flat chart must sit inside its unit square.
const Vec2 kCenter(0.5, 0.5);

std::vector<Vec2> pentagon() {
  return {{0.15, 0.05}, {0.75, 0.1}, {0.9, 0.55}, {0.45, 0.9}, {0.05, 0.5}};
}

}  // namespace

TEST(DofLayout, Counts) {
  EXPECT_EQ(dof_layout(kTriangle, 1).total, 3);
  const auto t2 = dof_layout(kTriangle, 2);
  EXPECT_EQ(t2.total, 7);
  EXPECT_EQ(t2.n_vertex, 3);
  EXPECT_EQ(t2.per_edge, 1);
  EXPECT_EQ(t2.n_moment, 1);
  const auto p4 = dof_layout(pentagon(), 4);
  EXPECT_EQ(p4.total, 5 + 5 * 3 + 6);
  EXPECT_EQ(p4.moment_dof(0), 20);
  EXPECT_EQ(p4.edge_node_dof(4, 4), 0);
  EXPECT_EQ(p4.edge_node_dof(2, 0), 2);
  EXPECT_EQ(p4.edge_node_dof(2, 1), p4.edge_dof(2, 0));
}

TEST(DofLayout, NodesOnEdgesAtLobattoPoints) {
  const auto L = dof_layout(kUnitSquare, 3);
  ASSERT_EQ(L.nodes.size(), 4u + 4u * 2u);
  // Edge 0 runs (0,0) -> (1,0); its interior nodes are the mapped ±1/sqrt(5).
  EXPECT_NEAR(L.nodes[L.edge_dof(0, 0)].x(), 0.5 * (1.0 - 1.0 / std::sqrt(5.0)), 1e-15);
  EXPECT_NEAR(L.nodes[L.edge_dof(0, 1)].x(), 0.5 * (1.0 + 1.0 / std::sqrt(5.0)), 1e-15);
  EXPECT_EQ(L.nodes[L.edge_dof(0, 0)].y(), 0.0);
}

TEST(DofLayout, UnsupportedOrders) {
  EXPECT_THROW(dof_layout(kTriangle, 0), UnsupportedOrder);
  EXPECT_THROW(dof_layout(kTriangle, 5), UnsupportedOrder);
}

TEST(Stabilization, NameRoundTrip) {
  EXPECT_EQ(stab_from_string("dofi-dofi"), StabKind::DofiDofi);
  EXPECT_EQ(stab_from_string("dofi_dofi"), StabKind::DofiDofi);
  EXPECT_EQ(stab_from_string("d-recipe"), StabKind::DRecipe);
  EXPECT_EQ(stab_from_string(to_string(StabKind::DRecipe)), StabKind::DRecipe);
  EXPECT_THROW(stab_from_string("none"), ConfigError);
  EXPECT_EQ(default_stabilization(2), StabKind::DofiDofi);
  EXPECT_EQ(default_stabilization(3), StabKind::DRecipe);
}

TEST(Projectors, IdentitiesOnRandomPolygons) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 25; ++t) {
    const auto poly = oracle::random_star_polygon(rng, 3 + t % 8, 0.1 + 0.9 * (t % 3) / 2.0,
                                                  Vec2(0.3 * t, -0.1 * t));
    for (int k = 1; k <= 4; ++k) {
      const auto P = local_projectors(poly, k);
      const int nk = P.basis.size();
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nk, nk);
      EXPECT_LE(oracle::max_abs(P.ellip.Pi_nabla * P.ellip.D - I), 1e-9) << t << " k=" << k;
      EXPECT_LE(oracle::max_abs(P.l2.Pi0_k * P.ellip.D - I), 1e-9) << t << " k=" << k;
    }
  }
}

TEST(Projectors, DMatrixIsInterpolantOfMonomials) {
  const auto poly = pentagon();
  const auto P = local_projectors(poly, 3);
  for (int a = 0; a < P.basis.size(); ++a) {
    const auto m = [&](const Vec2& x) {
      std::vector<double> v(P.basis.size());
      P.basis.values(x, v.data());
      return v[a];
    };
    const Eigen::VectorXd col = oracle::local_interpolant(P, m);
    EXPECT_LE((col - P.ellip.D.col(a)).cwiseAbs().maxCoeff(), 1e-12) << a;
  }
}

TEST(Projectors, PolynomialGradientsReproduced) {
  std::mt19937_64 rng(102);
  for (int k = 1; k <= 4; ++k) {
    const auto poly = oracle::random_star_polygon(rng, 6, 0.4);
    const auto P = local_projectors(poly, k);
    const oracle::Poly q = oracle::random_poly(rng, k, P.geometry.centroid);
    const Eigen::VectorXd v = oracle::local_interpolant(P, q);
    const Eigen::VectorXd gx = P.l2.Pi0_grad[0] * v;
    const Eigen::VectorXd gy = P.l2.Pi0_grad[1] * v;
    const Eigen::VectorXd pk = P.l2.Pi0_k * v;
    const Eigen::VectorXd pn = P.ellip.Pi_nabla * v;
    const int nk1 = ScaledMonomialBasis::dim(k - 1);
    std::vector<double> m(P.basis.size());
    for (int s = 0; s < 10; ++s) {
      const Vec2 x = P.geometry.centroid + 0.05 * Vec2(std::cos(s), std::sin(2 * s));
      P.basis.values(x, m.data());
      double ex = 0, ey = 0, val = 0, valn = 0;
      for (int a = 0; a < nk1; ++a) {
        ex += gx(a) * m[a];
        ey += gy(a) * m[a];
      }
      for (int a = 0; a < P.basis.size(); ++a) {
        val += pk(a) * m[a];
        valn += pn(a) * m[a];
      }
      EXPECT_NEAR(ex, q.grad(x).x(), 1e-10);
      EXPECT_NEAR(ey, q.grad(x).y(), 1e-10);
      EXPECT_NEAR(val, q(x), 1e-10);
      EXPECT_NEAR(valn, q(x), 1e-10);
    }
  }
}

TEST(Projectors, ConstantDofVector) {
  for (int k = 1; k <= 4; ++k) {
    const auto P = local_projectors(pentagon(), k);
    const Eigen::VectorXd ones = oracle::local_interpolant(P, [](const Vec2&) { return 1.0; });
    const Eigen::VectorXd c = P.l2.Pi0_k * ones;
    EXPECT_NEAR(c(0), 1.0, 1e-12);
    EXPECT_LE(c.tail(c.size() - 1).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((P.l2.Pi0_grad[0] * ones).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((P.l2.Pi0_grad[1] * ones).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Projectors, BoundaryAverageConstraintForLinear) {
  // For k = 1 the constant part of Π∇ is fixed by ∫_∂P Π∇v = ∫_∂P v; both are
  // linear along each edge, so the trapezoid rule is exact.
  const auto P = local_projectors(pentagon(), 1);
  Eigen::VectorXd v(5);
  v << 1.0, -2.0, 0.5, 3.0, 0.25;
  const Eigen::VectorXd p = P.ellip.Pi_nabla * v;
  std::vector<double> pv(5), m(3);
  for (int i = 0; i < 5; ++i) {
    P.basis.values(P.vertices[i], m.data());
    pv[i] = p(0) * m[0] + p(1) * m[1] + p(2) * m[2];
  }
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < 5; ++i) {
    const int j = (i + 1) % 5;
    const double len = (P.vertices[j] - P.vertices[i]).norm();
    lhs += 0.5 * len * (pv[i] + pv[j]);
    rhs += 0.5 * len * (v(i) + v(j));
  }
  EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(LocalForms, UnitSquareLinearMatchesHandComputed) {
  // Consistency: gradients of Π∇φ_i are (±1/2, ±1/2); stabilization: the
  // hourglass mode h = (1,-1,1,-1) scaled by the mean diagonal 1/2.
  const auto F = local_forms(kUnitSquare, 1, Chart::flat(), Vec2::Zero(), 0.0, StabKind::DofiDofi);
  Eigen::Matrix4d Kc;
  Kc << 1, 0, -1, 0, 0, 1, 0, -1, -1, 0, 1, 0, 0, -1, 0, 1;
  Kc *= 0.5;
  Eigen::Vector4d h(1, -1, 1, -1);
  const Eigen::Matrix4d expected = Kc + h * h.transpose() / 8.0;
  EXPECT_LE((F.consistency - Kc).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((F.A - expected).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(F.consistency);
  EXPECT_EQ(lu.rank(), 2);
}

TEST(LocalForms, StabilizationKillsPolynomials) {
  std::mt19937_64 rng(103);
  for (auto kind : {StabKind::DofiDofi, StabKind::DRecipe}) {
    for (int k = 1; k <= 4; ++k) {
      const auto poly = oracle::random_star_polygon(rng, 3 + k, 0.2, kCenter);
      const auto P = local_projectors(poly, k);
      const auto F = local_forms(P, Chart::flat(), Vec2::Zero(), 0.0, kind);
      const oracle::Poly q = oracle::random_poly(rng, k, P.geometry.centroid);
      const Eigen::VectorXd v = oracle::local_interpolant(P, q);
      EXPECT_LE((F.S * v).cwiseAbs().maxCoeff(), 1e-10 * F.S.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff());
      // S is symmetric positive semidefinite.
      EXPECT_LE((F.S - F.S.transpose()).cwiseAbs().maxCoeff(), 1e-14 * F.S.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.S);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST(LocalForms, KConsistencyOnRandomPolygons) {
  std::mt19937_64 rng(104);
  for (int t = 0; t < 15; ++t) {
    const auto poly = oracle::random_star_polygon(rng, 3 + t % 8, 0.3, kCenter);
    for (int k = 1; k <= 4; ++k) {
      const auto P = local_projectors(poly, k);
      const auto F = local_forms(P, Chart::flat(), Vec2::Zero(), 0.0, default_stabilization(k));
      Eigen::VectorXd v = Eigen::VectorXd::Random(P.layout.total);
      const oracle::Poly q = oracle::random_poly(rng, k, P.geometry.centroid);
      const Eigen::VectorXd qd = oracle::local_interpolant(P, q);
      double scale = 0.0;
      const double exact = oracle::exact_bilinear(P, v, q, &scale);
      const double discrete = v.dot(F.A * qd);
      EXPECT_LE(std::abs(discrete - exact), 1e-9 * scale) << "polygon " << t << " k=" << k;
    }
  }
}

TEST(LocalForms, StabilityOnFlatChart) {
  // Constants are the only kernel of the full stiffness matrix.
  std::mt19937_64 rng(105);
  for (auto kind : {StabKind::DofiDofi, StabKind::DRecipe}) {
    for (int k = 1; k <= 4; ++k) {
      const auto poly = oracle::random_star_polygon(rng, 5, 0.5, kCenter);
      const auto F = local_forms(poly, k, Chart::flat(), Vec2::Zero(), 0.0, kind);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.A);
      const auto& ev = es.eigenvalues();
      EXPECT_LE(std::abs(ev(0)), 1e-10 * ev(ev.size() - 1));
      EXPECT_GT(ev(1), 1e-8 * ev(ev.size() - 1)) << to_string(kind) << " k=" << k;
    }
  }
}

TEST(LocalForms, ConstantsInKernel) {
  for (int k = 1; k <= 4; ++k) {
    const auto P = local_projectors(pentagon(), k);
    const auto F = local_forms(P, Chart::flat(), Vec2::Zero(), 0.0, default_stabilization(k));
    const Eigen::VectorXd one = oracle::local_interpolant(P, [](const Vec2&) { return 1.0; });
    EXPECT_LE((F.A * one).cwiseAbs().maxCoeff(), 1e-9 * F.A.cwiseAbs().maxCoeff());
  }
}

TEST(LocalForms, AdvectionAndReactionOnPolynomials) {
  std::mt19937_64 rng(106);
  const Vec2 w(0.7, -1.2);
  const double gamma = 1.7;
  for (int k = 1; k <= 4; ++k) {
    const auto poly = oracle::random_star_polygon(rng, 6, 0.5, kCenter);
    const auto P = local_projectors(poly, k);
    const auto F = local_forms(P, Chart::flat(), w, gamma, StabKind::DofiDofi);
    const oracle::Poly p = oracle::random_poly(rng, k - 1, P.geometry.centroid);
    const oracle::Poly q = oracle::random_poly(rng, k, P.geometry.centroid);
    const Eigen::VectorXd pd = oracle::local_interpolant(P, p);
    const Eigen::VectorXd qd = oracle::local_interpolant(P, q);
    const auto rule = polygon_quadrature(poly, 2 * k + 2);
    double adv = 0.0, react = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Vec2& x = rule.points[i];
      adv += rule.weights[i] * w.dot(q.grad(x)) * p(x);
      react += rule.weights[i] * gamma * p(x) * p(x);
    }
    EXPECT_NEAR(pd.dot(F.Badv * qd), adv, 1e-10 * (1.0 + std::abs(adv))) << k;
    EXPECT_NEAR(pd.dot(F.C * pd), react, 1e-10 * (1.0 + std::abs(react))) << k;
  }
}

TEST(LocalLoad, ZeroForcing) {
  const auto P = local_projectors(pentagon(), 3);
  const Eigen::VectorXd b = local_load(P, Chart::flat(), [](const Vec2&) { return 0.0; });
  EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LocalLoad, UnitForcingHitsConstantMoment) {
  for (int k = 2; k <= 4; ++k) {
    const auto P = local_projectors(pentagon(), k);
    const Eigen::VectorXd b = local_load(P, Chart::flat(), [](const Vec2&) { return 1.0; });
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(P.layout.total);
    expected(P.layout.moment_dof(0)) = P.geometry.area;
    EXPECT_LE((b - expected).cwiseAbs().maxCoeff(), 1e-12) << k;
  }
}

TEST(LocalLoad, LowDegreeForcingHitsMoments) {
  const int k = 4;
  const auto P = local_projectors(pentagon(), k);
  const int nm = P.layout.n_moment;
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(nm, 0.5, -1.0);
  const auto f = [&](const Vec2& x) {
    std::vector<double> m(P.basis.size());
    P.basis.values(x, m.data());
    double s = 0.0;
    for (int a = 0; a < nm; ++a) s += c(a) * m[a];
    return s;
  };
  const Eigen::VectorXd b = local_load(P, Chart::flat(), f);
  EXPECT_LE(b.head(P.layout.total - nm).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((b.tail(nm) - P.geometry.area * c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LocalForms, MetricWeightsEnterCoefficients) {
  // On a conformal chart K = I, so the diffusion part matches the flat one.
  const std::vector<Vec2> cell{{0.1, 0.1}, {0.3, 0.1}, {0.25, 0.3}};
  const auto flat = local_forms(cell, 2, Chart::flat(DomainKind::QuarterDisk), Vec2::Zero(), 0.0,
                                StabKind::DofiDofi);
  const auto sphere = local_forms(cell, 2, Chart::stereo_north(), Vec2::Zero(), 0.0,
                                  StabKind::DofiDofi);
  EXPECT_LE((flat.consistency - sphere.consistency).cwiseAbs().maxCoeff(), 1e-12);
  const auto P = local_projectors(cell, 2);
  const Eigen::VectorXd lf = local_load(P, Chart::flat(DomainKind::QuarterDisk),
                                        [](const Vec2&) { return 1.0; });
  const Eigen::VectorXd ls = local_load(P, Chart::stereo_north(), [](const Vec2&) { return 1.0; });
  EXPECT_GT(ls(P.layout.moment_dof(0)), 3.0 * lf(P.layout.moment_dof(0)));
}
