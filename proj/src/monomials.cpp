#include "ivem/monomials.hpp"

#include "ivem/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ivem {

ScaledMonomialBasis::ScaledMonomialBasis(int degree, const Vec2& center, const Eigen::Matrix2d& frame)
    : degree_(degree), center_(center), A_(frame) {
  if (degree < 0) throw UnsupportedOrder("negative monomial degree");
  if (!A_.allFinite() || !(std::abs(A_.determinant()) > 0.0)) {
    throw GeometryError("monomial frame is singular");
  }
  lap_ = Vec2(A_.row(0).squaredNorm(), A_.row(1).squaredNorm());
  exponents_.reserve(dim(degree));
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) exponents_.push_back({d - b, b});
  }
}

ScaledMonomialBasis::ScaledMonomialBasis(int degree, const Vec2& center, double diameter)
    : ScaledMonomialBasis(degree, center,
                          diameter > 0.0 ? Eigen::Matrix2d(Eigen::Matrix2d::Identity() / diameter)
                                         : Eigen::Matrix2d::Zero()) {}

ScaledMonomialBasis ScaledMonomialBasis::for_polygon(int degree, std::span<const Vec2> polygon,
                                                     const Vec2& centroid) {
  const std::size_t n = polygon.size();
  if (n < 3) throw GeometryError("monomial frame needs a polygon");
  // Second moments about the centroid.
  double ixx = 0.0, iyy = 0.0, ixy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = polygon[i] - centroid;
    const Vec2 q = polygon[(i + 1) % n] - centroid;
    const double c = cross2(p, q);
    ixx += c * (p.x() * p.x() + p.x() * q.x() + q.x() * q.x());
    iyy += c * (p.y() * p.y() + p.y() * q.y() + q.y() * q.y());
    ixy += c * (2.0 * p.x() * p.y() + p.x() * q.y() + q.x() * p.y() + 2.0 * q.x() * q.y());
  }
  Eigen::Matrix2d J;
  J << ixx / 12.0, ixy / 24.0, ixy / 24.0, iyy / 12.0;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(J);
  const Eigen::Vector2d lam = eig.eigenvalues();
  // Nearly isotropic cells keep the coordinate axes.
  if (lam(1) > 1.05 * lam(0)) {
    Eigen::Vector2d major = eig.eigenvectors().col(1);
    if (major.x() < 0.0 || (major.x() == 0.0 && major.y() < 0.0)) major = -major;
    Q.row(0) = major.transpose();
    Q.row(1) = Eigen::Vector2d(-major.y(), major.x()).transpose();
  }
  Vec2 extent = Vec2::Zero();
  for (const Vec2& v : polygon) extent = extent.cwiseMax((Q * (v - centroid)).cwiseAbs());
  if (!(extent.minCoeff() > 0.0)) throw GeometryError("degenerate polygon in monomial frame");
  return ScaledMonomialBasis(degree, centroid, extent.cwiseInverse().asDiagonal() * Q);
}

void ScaledMonomialBasis::values(const Vec2& x, double* out) const {
  const Vec2 xi = A_ * (x - center_);
  const double sx = xi.x();
  const double sy = xi.y();
  out[0] = 1.0;
  // Each degree-d row follows from the previous one: ξ₁·(row d-1), then ξ₂·last.
  int prev = 0;
  for (int d = 1; d <= degree_; ++d) {
    const int cur = d * (d + 1) / 2;
    for (int b = 0; b < d; ++b) out[cur + b] = out[prev + b] * sx;
    out[cur + d] = out[prev + d - 1] * sy;
    prev = cur;
  }
}

void ScaledMonomialBasis::values_and_gradients(const Vec2& x, double* v, double* dx,
                                               double* dy) const {
  values(x, v);
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = exponents_[i];
    const double d1 = a > 0 ? a * v[index(a - 1, b)] : 0.0;
    const double d2 = b > 0 ? b * v[index(a, b - 1)] : 0.0;
    dx[i] = A_(0, 0) * d1 + A_(1, 0) * d2;
    dy[i] = A_(0, 1) * d1 + A_(1, 1) * d2;
  }
}

MonomialValues monomial_eval(const ScaledMonomialBasis& basis, std::span<const Vec2> points) {
  const int n = basis.size();
  const auto np = static_cast<Eigen::Index>(points.size());
  MonomialValues out;
  out.values.resize(np, n);
  out.grad_x.resize(np, n);
  out.grad_y.resize(np, n);
  out.laplacian.resize(np, n);
  std::vector<double> v(n), dx(n), dy(n);
  const Vec2 w = basis.laplace_weights();
  for (Eigen::Index p = 0; p < np; ++p) {
    basis.values_and_gradients(points[p], v.data(), dx.data(), dy.data());
    for (int i = 0; i < n; ++i) {
      const auto [a, b] = basis.exponent(i);
      out.values(p, i) = v[i];
      out.grad_x(p, i) = dx[i];
      out.grad_y(p, i) = dy[i];
      double lap = 0.0;
      if (a >= 2) lap += w.x() * a * (a - 1) * v[ScaledMonomialBasis::index(a - 2, b)];
      if (b >= 2) lap += w.y() * b * (b - 1) * v[ScaledMonomialBasis::index(a, b - 2)];
      out.laplacian(p, i) = lap;
    }
  }
  return out;
}

Eigen::MatrixXd monomial_mass_matrix(const ScaledMonomialBasis& basis, const QuadratureRule& rule) {
  const int n = basis.size();
  Eigen::MatrixXd V(static_cast<Eigen::Index>(rule.size()), n);
  std::vector<double> v(n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    basis.values(rule.points[q], v.data());
    for (int i = 0; i < n; ++i) V(static_cast<Eigen::Index>(q), i) = v[i];
  }
  const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(),
                                            static_cast<Eigen::Index>(rule.weights.size()));
  Eigen::MatrixXd H = V.transpose() * w.asDiagonal() * V;
  return 0.5 * (H + H.transpose());
}

}  // namespace ivem
