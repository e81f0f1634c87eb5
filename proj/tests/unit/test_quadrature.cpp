#include "ivem/errors.hpp"
#include "ivem/quadrature.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ivem;

namespace {

double integrate(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
  }
  return s;
}

double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<Vec2> regular_polygon(int n, double radius, Vec2 center) {
  std::vector<Vec2> p(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    p[i] = center + radius * Vec2(std::cos(t), std::sin(t));
  }
  return p;
}

}  // namespace

TEST(GaussLobatto, TwoPoints) {
  const Rule1D r = gauss_lobatto_rule(2);
  ASSERT_EQ(r.nodes.size(), 2u);
  EXPECT_EQ(r.nodes[0], -1.0);
  EXPECT_EQ(r.nodes[1], 1.0);
  EXPECT_DOUBLE_EQ(r.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(r.weights[1], 1.0);
}

TEST(GaussLobatto, ThreePoints) {
  const Rule1D r = gauss_lobatto_rule(3);
  EXPECT_NEAR(r.nodes[1], 0.0, 1e-16);
  EXPECT_NEAR(r.weights[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.weights[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.weights[2], 1.0 / 3.0, 1e-15);
  double x2 = 0.0;
  for (int i = 0; i < 3; ++i) x2 += r.weights[i] * r.nodes[i] * r.nodes[i];
  EXPECT_NEAR(x2, 2.0 / 3.0, 1e-15);
}

TEST(GaussLobatto, FourPointInteriorNodes) {
  const Rule1D r = gauss_lobatto_rule(4);
  EXPECT_NEAR(r.nodes[1], -1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(r.nodes[2], 1.0 / std::sqrt(5.0), 1e-15);
}

TEST(GaussLobatto, InteriorNodesAreRootsOfLegendreDerivative) {
  // P'_{n-1}(x) = (n-1) (x P_{n-1} - P_{n-2}) / (x² - 1)
  for (int n = 3; n <= 8; ++n) {
    const Rule1D r = gauss_lobatto_rule(n);
    for (int i = 1; i + 1 < n; ++i) {
      const double x = r.nodes[i];
      EXPECT_NEAR(x * legendre(n - 1, x) - legendre(n - 2, x), 0.0, 1e-14) << n;
      EXPECT_LT(r.nodes[i - 1], x);
    }
  }
}

TEST(GaussLobatto, ExactToDegree2nMinus3) {
  for (int n = 2; n <= 8; ++n) {
    const Rule1D r = gauss_lobatto_rule(n);
    EXPECT_EQ(r.exact_degree, 2 * n - 3);
    for (int d = 0; d <= 2 * n - 3; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      const double exact = d % 2 == 0 ? 2.0 / (d + 1) : 0.0;
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " d=" << d;
    }
  }
}

TEST(GaussLobatto, UnsupportedSizes) {
  EXPECT_THROW(gauss_lobatto_rule(1), UnsupportedOrder);
  EXPECT_THROW(gauss_lobatto_rule(9), UnsupportedOrder);
}

TEST(GaussLegendre, Exactness) {
  for (int n = 1; n <= 12; ++n) {
    const Rule1D r = gauss_legendre_rule(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      EXPECT_NEAR(s, d % 2 == 0 ? 2.0 / (d + 1) : 0.0, 1e-14);
    }
  }
}

TEST(TriangleQuadrature, MomentsMatchOracle) {
  const std::vector<Vec2> tri{{0.1, -0.2}, {1.3, 0.4}, {0.2, 0.9}};
  for (int deg = 0; deg <= 20; deg += 4) {
    const auto rule = triangle_quadrature(tri[0], tri[1], tri[2], deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const double exact = oracle::polygon_moment(tri, a, b);
        EXPECT_NEAR(integrate(rule, a, b), exact, 1e-13 * (1.0 + std::abs(exact)));
      }
  }
}

TEST(PolygonQuadrature, UnitSquareSecondMoment) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto rule = polygon_quadrature(sq, 2);
  EXPECT_NEAR(integrate(rule, 2, 0) + integrate(rule, 0, 2), 2.0 / 3.0, 1e-15);
}

TEST(PolygonQuadrature, ConstantGivesArea) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto poly = oracle::random_star_polygon(rng, 3 + i % 8, 0.3, Vec2(2.0, -1.0));
    const auto rule = polygon_quadrature(poly, 0);
    const double area = oracle::signed_area(poly);
    EXPECT_NEAR(integrate(rule, 0, 0) / area, 1.0, 1e-12);
  }
}

TEST(PolygonQuadrature, RegularPentagonToDegreeEight) {
  const auto pent = regular_polygon(5, 0.7, Vec2(0.3, 0.2));
  const auto rule = polygon_quadrature(pent, 8);
  EXPECT_GE(rule.exact_degree, 8);
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; a + b <= 8; ++b) {
      const double exact = oracle::polygon_moment(pent, a, b);
      EXPECT_NEAR(integrate(rule, a, b), exact, 1e-11 * std::max(1e-3, std::abs(exact)));
    }
}

TEST(PolygonQuadrature, RandomConvexPolygons) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const auto poly = oracle::random_convex_polygon(rng, 3 + i % 9);
    const int deg = 2 + i % 11;
    const auto rule = polygon_quadrature(poly, deg);
    // Centered monomials keep the relative comparison meaningful.
    const Vec2 c = oracle::area_centroid(poly);
    std::vector<Vec2> shifted(poly);
    for (auto& p : shifted) p -= c;
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const double exact = oracle::polygon_moment(shifted, a, b);
        double got = 0.0, mag = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec2 d = rule.points[q] - c;
          const double t = rule.weights[q] * std::pow(d.x(), a) * std::pow(d.y(), b);
          got += t;
          mag += std::abs(t);
        }
        EXPECT_LE(std::abs(got - exact), 1e-11 * mag) << "polygon " << i << " a=" << a << " b=" << b;
      }
  }
}

TEST(PolygonQuadrature, PositiveWeightsInsideCell) {
  std::mt19937_64 rng(9);
  const auto poly = oracle::random_star_polygon(rng, 7);
  const auto rule = polygon_quadrature(poly, 12);
  for (double w : rule.weights) EXPECT_GT(w, 0.0);
}

TEST(PolygonQuadrature, RejectsSelfIntersecting) {
  const std::vector<Vec2> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_THROW(polygon_quadrature(bow, 2), GeometryError);
}

TEST(PolygonQuadrature, RejectsTooHighDegree) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_THROW(polygon_quadrature(sq, kMaxPolygonQuadratureDegree + 1), Error);
}
