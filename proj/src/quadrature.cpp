#include "ivem/quadrature.hpp"

#include "ivem/errors.hpp"
#include "ivem/mesh.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ivem {

namespace {

// Legendre P_n and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

Rule1D gauss_legendre_rule(int n) {
  if (n < 1) throw UnsupportedOrder("Gauss-Legendre rule needs at least one point");
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.exact_degree = 2 * n - 1;
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Rule1D gauss_lobatto_rule(int n) {
  if (n < 2 || n > 8) {
    throw UnsupportedOrder("Gauss-Lobatto rule supports 2..8 points, got " + std::to_string(n));
  }
  Rule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.exact_degree = 2 * n - 3;
  const int m = n - 1;  // interior nodes are the roots of P'_m
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  for (int i = 1; i < m; ++i) {
    // Chebyshev-Gauss-Lobatto initial guess, Newton on P'_m using
    // (1 - x^2) P''_m = 2x P'_m - m(m+1) P_m.
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(m, x);
      const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
  }
  // Symmetrize and pin the midpoint.
  for (int i = 1; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = legendre(m, rule.nodes[i]).first;
    rule.weights[i] = 2.0 / (m * (m + 1.0) * p * p);
  }
  return rule;
}

QuadratureRule triangle_quadrature(const Vec2& a, const Vec2& b, const Vec2& c, int degree) {
  // x(s, t) = (1 - s) a + s ((1 - t) b + t c), |J| = 2|T| s. The integrand
  // has degree `degree` in t and degree + 1 in s.
  const auto rule_s = gauss_legendre_rule(std::max(1, (degree + 2 + 1) / 2));
  const auto rule_t = gauss_legendre_rule(std::max(1, (degree + 1 + 1) / 2));
  const double area2 = cross2(b - a, c - a);
  QuadratureRule q;
  q.exact_degree = degree;
  q.points.reserve(rule_s.nodes.size() * rule_t.nodes.size());
  q.weights.reserve(q.points.capacity());
  for (std::size_t i = 0; i < rule_s.nodes.size(); ++i) {
    const double s = 0.5 * (rule_s.nodes[i] + 1.0);
    const double ws = 0.5 * rule_s.weights[i];
    for (std::size_t j = 0; j < rule_t.nodes.size(); ++j) {
      const double t = 0.5 * (rule_t.nodes[j] + 1.0);
      const double wt = 0.5 * rule_t.weights[j];
      q.points.push_back((1.0 - s) * a + s * ((1.0 - t) * b + t * c));
      q.weights.push_back(area2 * s * ws * wt);
    }
  }
  return q;
}

QuadratureRule polygon_quadrature(std::span<const Vec2> vertices, int degree) {
  if (vertices.size() < 3) throw GeometryError("polygon quadrature needs at least 3 vertices");
  if (degree < 0 || degree > kMaxPolygonQuadratureDegree) {
    throw UnsupportedOrder("polygon quadrature degree must be in [0, 20], got " +
                           std::to_string(degree));
  }
  if (!is_simple_polygon(vertices)) throw GeometryError("self-intersecting polygon");
  const auto geo = polygon_geometry(vertices);
  if (!(geo.area > 0.0)) throw GeometryError("polygon is not counterclockwise");

  QuadratureRule q;
  q.exact_degree = degree;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& v0 = vertices[i];
    const Vec2& v1 = vertices[(i + 1) % n];
    if (cross2(v0 - geo.centroid, v1 - geo.centroid) <= 0.0) {
      throw GeometryError("polygon is not star-shaped with respect to its centroid");
    }
    const auto t = triangle_quadrature(geo.centroid, v0, v1, degree);
    q.points.insert(q.points.end(), t.points.begin(), t.points.end());
    q.weights.insert(q.weights.end(), t.weights.begin(), t.weights.end());
  }
  return q;
}

}  // namespace ivem
