#pragma once

#include "ivem/assembly.hpp"
#include "ivem/chart.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ivem {

/// u(x, y) = sin(2πx) sin(2πy) on a chart, with advection ŵ and reaction γ.
struct ManufacturedCase {
  Chart chart = Chart::flat();
  Vec2 w_hat{0.0, 0.0};
  double gamma = 0.0;

  double u(const Vec2& s) const;
  Vec2 grad_u(const Vec2& s) const;
  /// Right-hand side of -Δ_G u + ŵ·G^{-1/2}∇u + γu in chart coordinates.
  double forcing(const Vec2& s) const;

  ScalarField u_field() const;
  ScalarField forcing_field() const;
  ProblemSpec problem(StabKind stab_kind) const;
};

double forcing(const ManufacturedCase& mc, const Vec2& s);

/// Exact solution for error measurement.
struct ExactSolution {
  std::function<double(const Vec2&)> u;
  std::function<Vec2(const Vec2&)> grad;
};

ExactSolution exact_solution(const ManufacturedCase& mc);

struct ErrorOptions {
  /// Quadrature degree; < 0 selects 2k + 6.
  int quad_degree = -1;
  /// Weight integrands by sqrt(det G) (surface measure) instead of the
  /// flat chart measure.
  bool surface_weighted = false;
};

struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;  // sqrt(l2² + h1_semi²)
};

/// ‖u - Π0_k u_h‖ over the chart domain and the broken H1 norm of the same
/// difference. Per-cell contributions run in parallel and are summed
/// pairwise in cell order.
ErrorNorms compute_errors(const DiscreteSolution& solution, const ExactSolution& exact,
                          const ErrorOptions& options = {});
ErrorNorms compute_errors(const DiscreteSolution& solution, const ManufacturedCase& mc,
                          const ErrorOptions& options = {});

/// Single-threaded version of compute_errors.
ErrorNorms compute_errors_reference(const DiscreteSolution& solution, const ExactSolution& exact,
                                    const ErrorOptions& options = {});

/// Sum in a fixed binary tree order.
double pairwise_sum(std::span<const double> values);

struct ConvergenceRow {
  double h = 0.0;
  Index n_dofs = 0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  std::optional<double> eoc_l2;
  std::optional<double> eoc_h1;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

/// eoc_ℓ = log(e_{ℓ-1}/e_ℓ) / log(h_{ℓ-1}/h_ℓ); absent at level 0.
ConvergenceReport eoc_table(std::span<const double> h, std::span<const double> err_l2,
                            std::span<const double> err_h1, std::span<const Index> n_dofs = {});

/// Least-squares slope of log e against log h over the last `last_n`
/// points (all points when last_n <= 0 or exceeds the count).
double least_squares_slope(std::span<const double> h, std::span<const double> err, int last_n = 0);

}  // namespace ivem
