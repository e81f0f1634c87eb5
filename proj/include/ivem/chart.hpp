#pragma once

#include "ivem/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>

namespace ivem {

enum class ChartKind { Flat, MongeTrig, StereoNorth, StereoSouth, Custom };
enum class DomainKind { QuarterDisk, UnitDisk, UnitSquare };

std::string to_string(ChartKind kind);
std::string to_string(DomainKind domain);
DomainKind domain_from_string(std::string_view name);

/// Metric package at one chart point. The frame is the Gram-Schmidt
/// orthogonalized tangent pair, so the metric is diagonal.
struct MetricData {
  double g11 = 1.0;
  double g22 = 1.0;
  double det_g = 1.0;
  double sqrt_det_g = 1.0;
  double inv_g11 = 1.0;
  double inv_g22 = 1.0;
  double inv_sqrt_g11 = 1.0;
  double inv_sqrt_g22 = 1.0;
  std::array<Vec3, 2> frame{Vec3::UnitX(), Vec3::UnitY()};
};

struct MetricDerivatives {
  double dg11_dx = 0.0;
  double dg11_dy = 0.0;
  double dg22_dx = 0.0;
  double dg22_dy = 0.0;
};

/// Chart-form coefficients of the surface advection-diffusion-reaction
/// problem. K is diagonal and stored as its two entries.
struct PdeCoefficients {
  Vec2 K{1.0, 1.0};
  Vec2 w_tilde{0.0, 0.0};
  double gamma_tilde = 0.0;
  double weight = 1.0;
};

struct MongeParams {
  double r = 2.0;
  double a = 0.0;
  int freq = 5;
};

/// A surface parametrization over a planar reference domain.
///
/// Built-in charts (flat, trigonometric Monge graph, north/south
/// stereographic) evaluate the tangent frame, metric and metric
/// derivatives in closed form. A custom chart only supplies the embedding;
/// its frame comes from central differences with step 1e-6 and its metric
/// derivatives from central differences of the metric with step 1e-5, so
/// expect roughly 1e-8 relative accuracy on derivatives rather than
/// round-off.
class Chart {
 public:
  using Embedding = std::function<Vec3(const Vec2&)>;

  static Chart flat(DomainKind domain = DomainKind::UnitSquare);
  static Chart monge_trig(double r, double a, int freq);
  static Chart stereo_north();
  static Chart stereo_south();
  static Chart custom(Embedding embedding, DomainKind domain);

  /// Selects a built-in chart by its configuration name: "flat",
  /// "monge_trig", "stereo_north" or "stereo_south".
  static Chart from_name(std::string_view name, const MongeParams& params = {},
                         DomainKind flat_domain = DomainKind::UnitSquare);

  ChartKind kind() const { return kind_; }
  DomainKind domain() const { return domain_; }
  const MongeParams& monge() const { return monge_; }
  std::string name() const { return to_string(kind_); }

  /// Boundary points within 1e-12 count as inside.
  bool contains(const Vec2& s) const;

  Vec3 map_point(const Vec2& s) const;
  MetricData metric_at(const Vec2& s) const;
  MetricDerivatives metric_derivatives_at(const Vec2& s) const;

 private:
  Chart(ChartKind kind, DomainKind domain) : kind_(kind), domain_(domain) {}

  void check_domain(const Vec2& s) const;
  std::array<Vec3, 2> tangents(const Vec2& s) const;

  ChartKind kind_;
  DomainKind domain_;
  MongeParams monge_{};
  Embedding embedding_;
};

/// Builds the metric package from a raw tangent pair (t1 kept, t2
/// orthogonalized against t1).
MetricData metric_from_tangents(const Vec3& t1, const Vec3& t2);

PdeCoefficients pde_coefficients(const MetricData& metric, const Vec2& w_hat, double gamma);
PdeCoefficients pde_coefficients_at(const Chart& chart, const Vec2& s, const Vec2& w_hat,
                                    double gamma);

/// sqrt(max(g11,g22)^3 / min(g11,g22)): the factor sqrt(det G) * cond(G^-1)
/// that bounds the stiffness condition number relative to the flat case.
double anisotropy(double g11, double g22);
double anisotropy_at(const Chart& chart, const Vec2& s);

/// Spectral condition number max(g11,g22)/min(g11,g22) of the metric.
double metric_condition_at(const Chart& chart, const Vec2& s);

}  // namespace ivem
