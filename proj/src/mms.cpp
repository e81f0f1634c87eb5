#include "ivem/mms.hpp"

#include "ivem/errors.hpp"
#include "ivem/vem_element.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <string>

namespace ivem {

namespace {
constexpr double kPi = std::numbers::pi;
}

double ManufacturedCase::u(const Vec2& s) const {
  return std::sin(2.0 * kPi * s.x()) * std::sin(2.0 * kPi * s.y());
}

Vec2 ManufacturedCase::grad_u(const Vec2& s) const {
  const double sx = std::sin(2.0 * kPi * s.x()), cx = std::cos(2.0 * kPi * s.x());
  const double sy = std::sin(2.0 * kPi * s.y()), cy = std::cos(2.0 * kPi * s.y());
  return {2.0 * kPi * cx * sy, 2.0 * kPi * sx * cy};
}

double ManufacturedCase::forcing(const Vec2& s) const {
  const MetricData g = chart.metric_at(s);
  const MetricDerivatives dg = chart.metric_derivatives_at(s);
  const double sx = std::sin(2.0 * kPi * s.x()), cx = std::cos(2.0 * kPi * s.x());
  const double sy = std::sin(2.0 * kPi * s.y()), cy = std::cos(2.0 * kPi * s.y());
  const double g11 = g.g11, g22 = g.g22, det = g.det_g;
  const double w1 = w_hat.x(), w2 = w_hat.y();

  const double advect_reaction_x = sy * (2.0 * kPi * w1 * cx / std::sqrt(g11) + gamma * sx);
  const double dy_metric = kPi * sx * cy * (g11 * dg.dg22_dy - dg.dg11_dy * g22) / (g22 * det);
  const double dx_metric = cx * (dg.dg11_dx * g22 - g11 * dg.dg22_dx) / (g11 * det);
  // Second-derivative part: 4π² sin sin (1/g11 + 1/g22).
  const double laplace = 4.0 * kPi * sx * (g11 + g22) / det;
  const double advect_y = 2.0 * kPi * w2 * sx * cy / std::sqrt(g22);
  return advect_reaction_x + dy_metric + kPi * sy * (dx_metric + laplace) + advect_y;
}

ScalarField ManufacturedCase::u_field() const {
  return [c = *this](const Vec2& s) { return c.u(s); };
}

ScalarField ManufacturedCase::forcing_field() const {
  return [c = *this](const Vec2& s) { return c.forcing(s); };
}

ProblemSpec ManufacturedCase::problem(StabKind stab_kind) const {
  ProblemSpec p;
  p.chart = chart;
  p.w_hat = w_hat;
  p.gamma = gamma;
  p.stab_kind = stab_kind;
  p.forcing = forcing_field();
  return p;
}

double forcing(const ManufacturedCase& mc, const Vec2& s) { return mc.forcing(s); }

ExactSolution exact_solution(const ManufacturedCase& mc) {
  return {[mc](const Vec2& s) { return mc.u(s); }, [mc](const Vec2& s) { return mc.grad_u(s); }};
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

namespace {

struct CellError {
  double l2 = 0.0;
  double semi = 0.0;
};

CellError cell_error(const DiscreteSolution& sol, Index c, const ExactSolution& exact,
                     const ErrorOptions& opt) {
  const PolyMesh& mesh = *sol.mesh;
  const int k = sol.k;
  const auto verts = mesh.cell_vertices(c);
  const int degree = opt.quad_degree < 0 ? 2 * k + 6 : opt.quad_degree;
  const auto P = local_projectors(verts, k, degree);
  const auto& dofs = sol.dof_map.cell_dofs[c];
  Eigen::VectorXd local(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) local(static_cast<Eigen::Index>(i)) = sol.values(dofs[i]);
  const Eigen::VectorXd coef = P.l2.Pi0_k * local;
  const int nk = P.basis.size();
  std::vector<double> v(nk), dx(nk), dy(nk);
  CellError out;
  for (std::size_t q = 0; q < P.rule.size(); ++q) {
    const Vec2& x = P.rule.points[q];
    P.basis.values_and_gradients(x, v.data(), dx.data(), dy.data());
    double uh = 0.0;
    Vec2 guh = Vec2::Zero();
    for (int a = 0; a < nk; ++a) {
      uh += coef(a) * v[a];
      guh.x() += coef(a) * dx[a];
      guh.y() += coef(a) * dy[a];
    }
    double w = P.rule.weights[q];
    if (opt.surface_weighted) w *= sol.chart->metric_at(x).sqrt_det_g;
    const double e = exact.u(x) - uh;
    out.l2 += w * e * e;
    out.semi += w * (exact.grad(x) - guh).squaredNorm();
  }
  return out;
}

ErrorNorms errors_impl(const DiscreteSolution& sol, const ExactSolution& exact,
                       const ErrorOptions& opt, bool parallel) {
  if (sol.mesh == nullptr || sol.chart == nullptr) throw Error("solution without mesh or chart");
  const Index nc = sol.mesh->n_cells();
  std::vector<double> l2(nc), semi(nc);
  std::vector<std::exception_ptr> errors(nc);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (Index c = 0; c < nc; ++c) {
    try {
      const auto e = cell_error(sol, c, exact, opt);
      l2[c] = e.l2;
      semi[c] = e.semi;
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (Index c = 0; c < nc; ++c) {
    if (errors[c]) rethrow_with_context(errors[c], "cell " + std::to_string(c) + ": ");
  }
  ErrorNorms out;
  const double a = pairwise_sum(l2), b = pairwise_sum(semi);
  out.l2 = std::sqrt(a);
  out.h1_semi = std::sqrt(b);
  out.h1 = std::sqrt(a + b);
  return out;
}

}  // namespace

ErrorNorms compute_errors(const DiscreteSolution& solution, const ExactSolution& exact,
                          const ErrorOptions& options) {
  return errors_impl(solution, exact, options, true);
}

ErrorNorms compute_errors(const DiscreteSolution& solution, const ManufacturedCase& mc,
                          const ErrorOptions& options) {
  return errors_impl(solution, exact_solution(mc), options, true);
}

ErrorNorms compute_errors_reference(const DiscreteSolution& solution, const ExactSolution& exact,
                                    const ErrorOptions& options) {
  return errors_impl(solution, exact, options, false);
}

ConvergenceReport eoc_table(std::span<const double> h, std::span<const double> err_l2,
                            std::span<const double> err_h1, std::span<const Index> n_dofs) {
  if (h.size() != err_l2.size() || h.size() != err_h1.size()) {
    throw Error("eoc_table: h and error sequences differ in length");
  }
  ConvergenceReport rep;
  for (std::size_t l = 0; l < h.size(); ++l) {
    ConvergenceRow r;
    r.h = h[l];
    r.err_l2 = err_l2[l];
    r.err_h1 = err_h1[l];
    if (l < n_dofs.size()) r.n_dofs = n_dofs[l];
    if (l > 0) {
      const double lh = std::log(h[l - 1] / h[l]);
      r.eoc_l2 = std::log(err_l2[l - 1] / err_l2[l]) / lh;
      r.eoc_h1 = std::log(err_h1[l - 1] / err_h1[l]) / lh;
    }
    rep.rows.push_back(r);
  }
  return rep;
}

double least_squares_slope(std::span<const double> h, std::span<const double> err, int last_n) {
  const std::size_t n = h.size();
  if (n != err.size() || n < 2) throw Error("slope fit needs at least two matching points");
  const std::size_t m = (last_n <= 0 || static_cast<std::size_t>(last_n) > n) ? n : last_n;
  if (m < 2) throw Error("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - m; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dm = static_cast<double>(m);
  return (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
}

}  // namespace ivem
