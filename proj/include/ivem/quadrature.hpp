#pragma once

#include "ivem/types.hpp"

#include <span>
#include <vector>

namespace ivem {

/// One-dimensional rule on the reference interval [-1, 1].
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int exact_degree = 0;
};

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Lobatto rule with both endpoints, 2 <= n_points <= 8. Nodes are
/// ascending; exact for degree 2n-3.
Rule1D gauss_lobatto_rule(int n_points);

/// Gauss-Legendre rule with n_points >= 1 interior nodes; exact for 2n-1.
Rule1D gauss_legendre_rule(int n_points);

/// Collapsed-coordinate (conical product) rule on a triangle, exact for
/// polynomials of total degree <= degree.
QuadratureRule triangle_quadrature(const Vec2& a, const Vec2& b, const Vec2& c, int degree);

/// Fan sub-triangulation from the area centroid with a degree-exact rule on
/// every sub-triangle. Requires a simple counterclockwise polygon that is
/// star-shaped with respect to its centroid; throws GeometryError otherwise.
QuadratureRule polygon_quadrature(std::span<const Vec2> vertices, int degree);

inline constexpr int kMaxPolygonQuadratureDegree = 20;

}  // namespace ivem
