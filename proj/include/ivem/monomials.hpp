#pragma once

#include "ivem/quadrature.hpp"
#include "ivem/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace ivem {

/// Scaled monomials m_α(x) = ξ^α with ξ = A (x - x_P) and |α| <= degree, in
/// graded lexicographic order with ξ₁ first: 1, ξ₁, ξ₂, ξ₁², ξ₁ξ₂, ξ₂², ...
/// The frame A = S Q has orthonormal rows Q and positive diagonal S, so the
/// Laplacian maps each monomial to at most two lower ones.
class ScaledMonomialBasis {
 public:
  /// Isotropic scaling A = I / diameter.
  ScaledMonomialBasis(int degree, const Vec2& center, double diameter);
  /// Principal-axis frame of a polygon: axes from its inertia tensor, scales
  /// from the vertex extents along each axis.
  static ScaledMonomialBasis for_polygon(int degree, std::span<const Vec2> polygon,
                                         const Vec2& centroid);

  static int dim(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }
  /// Position of exponent (a, b) in the ordering.
  static int index(int a, int b) {
    const int d = a + b;
    return d * (d + 1) / 2 + b;
  }

  int degree() const { return degree_; }
  int size() const { return dim(degree_); }
  const Vec2& center() const { return center_; }
  /// ξ = frame() (x - center()).
  const Eigen::Matrix2d& frame() const { return A_; }
  /// Diagonal of A Aᵀ: Δ_x m = w₁ ∂²m/∂ξ₁² + w₂ ∂²m/∂ξ₂².
  const Vec2& laplace_weights() const { return lap_; }
  const std::array<int, 2>& exponent(int i) const { return exponents_[i]; }

  /// Values of all monomials at x, written to out[0 .. size()).
  void values(const Vec2& x, double* out) const;
  /// Values and first derivatives.
  void values_and_gradients(const Vec2& x, double* v, double* dx, double* dy) const;

 private:
  ScaledMonomialBasis(int degree, const Vec2& center, const Eigen::Matrix2d& frame);

  int degree_;
  Vec2 center_;
  Eigen::Matrix2d A_;
  Vec2 lap_;
  std::vector<std::array<int, 2>> exponents_;
};

/// Monomial data sampled at a point set; row p holds point p.
struct MonomialValues {
  Eigen::MatrixXd values;
  Eigen::MatrixXd grad_x;
  Eigen::MatrixXd grad_y;
  Eigen::MatrixXd laplacian;
};

MonomialValues monomial_eval(const ScaledMonomialBasis& basis, std::span<const Vec2> points);

/// H_{αβ} = ∫ m_α m_β with the given rule.
Eigen::MatrixXd monomial_mass_matrix(const ScaledMonomialBasis& basis, const QuadratureRule& rule);

}  // namespace ivem
