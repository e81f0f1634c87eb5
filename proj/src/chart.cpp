#include "ivem/chart.hpp"

#include "ivem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ivem {

namespace {

constexpr double kDomainTol = 1e-12;
constexpr double kSingularTol = 1e-14;
constexpr double kTangentStep = 1e-6;
constexpr double kMetricStep = 1e-5;

// Height function z = sqrt(F) of the perturbed sphere and its partial
// derivatives up to second order, all in closed form.
struct MongeHeight {
  double h, hx, hy, hxx, hxy, hyy;
};

MongeHeight monge_height(const MongeParams& p, const Vec2& s) {
  const double x = s.x(), y = s.y();
  const double c = p.freq * std::numbers::pi / 2.0;
  const double rho2 = x * x + y * y;
  const double theta = c * rho2;
  const double cos_t = std::cos(theta);
  const double F = p.r - rho2 + p.a * cos_t * cos_t;
  if (!(F > 0.0)) {
    std::ostringstream msg;
    msg << "monge_trig height is not real at (" << x << ", " << y << "): r - |s|^2 + a cos^2 = " << F;
    throw DomainError(msg.str());
  }
  // F_x = -2x (1 + a c sin 2theta), likewise for y.
  const double sfac = 1.0 + p.a * c * std::sin(2.0 * theta);
  const double dsfac = 4.0 * p.a * c * c * std::cos(2.0 * theta);  // d sfac = dsfac * (x, y)
  const double Fx = -2.0 * x * sfac;
  const double Fy = -2.0 * y * sfac;
  const double Fxx = -2.0 * sfac - 2.0 * x * dsfac * x;
  const double Fxy = -2.0 * x * dsfac * y;
  const double Fyy = -2.0 * sfac - 2.0 * y * dsfac * y;

  MongeHeight m{};
  m.h = std::sqrt(F);
  m.hx = Fx / (2.0 * m.h);
  m.hy = Fy / (2.0 * m.h);
  m.hxx = Fxx / (2.0 * m.h) - Fx * m.hx / (2.0 * F);
  m.hxy = Fxy / (2.0 * m.h) - Fx * m.hy / (2.0 * F);
  m.hyy = Fyy / (2.0 * m.h) - Fy * m.hy / (2.0 * F);
  return m;
}

}  // namespace

std::string to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::Flat: return "flat";
    case ChartKind::MongeTrig: return "monge_trig";
    case ChartKind::StereoNorth: return "stereo_north";
    case ChartKind::StereoSouth: return "stereo_south";
    case ChartKind::Custom: return "custom";
  }
  return "unknown";
}

std::string to_string(DomainKind domain) {
  switch (domain) {
    case DomainKind::QuarterDisk: return "quarter_disk";
    case DomainKind::UnitDisk: return "unit_disk";
    case DomainKind::UnitSquare: return "unit_square";
  }
  return "unknown";
}

DomainKind domain_from_string(std::string_view name) {
  if (name == "quarter_disk") return DomainKind::QuarterDisk;
  if (name == "unit_disk") return DomainKind::UnitDisk;
  if (name == "unit_square") return DomainKind::UnitSquare;
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

Chart Chart::flat(DomainKind domain) {
  if (domain == DomainKind::UnitDisk) {
    throw DomainError("flat chart supports only unit_square or quarter_disk domains");
  }
  return Chart(ChartKind::Flat, domain);
}

Chart Chart::monge_trig(double r, double a, int freq) {
  Chart chart(ChartKind::MongeTrig, DomainKind::QuarterDisk);
  chart.monge_ = MongeParams{r, a, freq};
  if (!(r > 1.0)) {
    // r > 1 guarantees a real height on the unit quarter disk; otherwise
    // audit the radicand on a sample grid.
    constexpr int n = 200;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const Vec2 s(double(i) / n, double(j) / n);
        if (s.squaredNorm() <= 1.0) monge_height(chart.monge_, s);
      }
    }
  }
  return chart;
}

Chart Chart::stereo_north() { return Chart(ChartKind::StereoNorth, DomainKind::UnitDisk); }
Chart Chart::stereo_south() { return Chart(ChartKind::StereoSouth, DomainKind::UnitDisk); }

Chart Chart::custom(Embedding embedding, DomainKind domain) {
  Chart chart(ChartKind::Custom, domain);
  chart.embedding_ = std::move(embedding);
  return chart;
}

Chart Chart::from_name(std::string_view name, const MongeParams& params, DomainKind flat_domain) {
  if (name == "flat") return flat(flat_domain);
  if (name == "monge_trig") return monge_trig(params.r, params.a, params.freq);
  if (name == "stereo_north") return stereo_north();
  if (name == "stereo_south") return stereo_south();
  throw ConfigError("unknown chart '" + std::string(name) + "'");
}

bool Chart::contains(const Vec2& s) const {
  switch (domain_) {
    case DomainKind::QuarterDisk:
      return s.x() >= -kDomainTol && s.y() >= -kDomainTol && s.norm() <= 1.0 + kDomainTol;
    case DomainKind::UnitDisk:
      return s.norm() <= 1.0 + kDomainTol;
    case DomainKind::UnitSquare:
      return s.x() >= -kDomainTol && s.y() >= -kDomainTol && s.x() <= 1.0 + kDomainTol &&
             s.y() <= 1.0 + kDomainTol;
  }
  return false;
}

void Chart::check_domain(const Vec2& s) const {
  if (!contains(s)) {
    std::ostringstream msg;
    msg << "point (" << s.x() << ", " << s.y() << ") lies outside the " << to_string(domain_)
        << " domain of chart " << name();
    throw DomainError(msg.str());
  }
}

Vec3 Chart::map_point(const Vec2& s) const {
  check_domain(s);
  switch (kind_) {
    case ChartKind::Flat:
      return {s.x(), s.y(), 0.0};
    case ChartKind::MongeTrig:
      return {s.x(), s.y(), monge_height(monge_, s).h};
    case ChartKind::StereoNorth:
    case ChartKind::StereoSouth: {
      const double rho2 = s.squaredNorm();
      const double d = 1.0 + rho2;
      const double z = (1.0 - rho2) / d;
      return {2.0 * s.x() / d, 2.0 * s.y() / d, kind_ == ChartKind::StereoNorth ? z : -z};
    }
    case ChartKind::Custom:
      return embedding_(s);
  }
  return Vec3::Zero();
}

std::array<Vec3, 2> Chart::tangents(const Vec2& s) const {
  switch (kind_) {
    case ChartKind::Flat:
      return {Vec3::UnitX(), Vec3::UnitY()};
    case ChartKind::MongeTrig: {
      const auto m = monge_height(monge_, s);
      return {Vec3(1.0, 0.0, m.hx), Vec3(0.0, 1.0, m.hy)};
    }
    case ChartKind::StereoNorth:
    case ChartKind::StereoSouth: {
      const double x = s.x(), y = s.y();
      const double d = 1.0 + x * x + y * y;
      const double d2 = d * d;
      const double sign = kind_ == ChartKind::StereoNorth ? 1.0 : -1.0;
      return {Vec3(2.0 * (1.0 - x * x + y * y) / d2, -4.0 * x * y / d2, -sign * 4.0 * x / d2),
              Vec3(-4.0 * x * y / d2, 2.0 * (1.0 + x * x - y * y) / d2, -sign * 4.0 * y / d2)};
    }
    case ChartKind::Custom: {
      const Vec2 ex(kTangentStep, 0.0), ey(0.0, kTangentStep);
      return {(embedding_(s + ex) - embedding_(s - ex)) / (2.0 * kTangentStep),
              (embedding_(s + ey) - embedding_(s - ey)) / (2.0 * kTangentStep)};
    }
  }
  return {Vec3::Zero(), Vec3::Zero()};
}

MetricData metric_from_tangents(const Vec3& t1, const Vec3& t2) {
  MetricData m;
  const double n1 = t1.squaredNorm();
  if (n1 < kSingularTol) throw SingularMetricError("degenerate first tangent vector");
  const Vec3 v2 = t2 - (t2.dot(t1) / n1) * t1;
  const double n2 = v2.squaredNorm();
  if (n2 < kSingularTol) throw SingularMetricError("degenerate second tangent vector");
  m.frame = {t1, v2};
  m.g11 = n1;
  m.g22 = n2;
  m.det_g = n1 * n2;
  m.sqrt_det_g = std::sqrt(m.det_g);
  m.inv_g11 = 1.0 / n1;
  m.inv_g22 = 1.0 / n2;
  m.inv_sqrt_g11 = 1.0 / std::sqrt(n1);
  m.inv_sqrt_g22 = 1.0 / std::sqrt(n2);
  return m;
}

MetricData Chart::metric_at(const Vec2& s) const {
  check_domain(s);
  const auto t = tangents(s);
  return metric_from_tangents(t[0], t[1]);
}

MetricDerivatives Chart::metric_derivatives_at(const Vec2& s) const {
  check_domain(s);
  MetricDerivatives d;
  switch (kind_) {
    case ChartKind::Flat:
      return d;
    case ChartKind::MongeTrig: {
      // g11 = 1 + p^2, g22 = 1 + q^2 / (1 + p^2) with p = h_x, q = h_y.
      const auto m = monge_height(monge_, s);
      const double p = m.hx, q = m.hy;
      const double g11 = 1.0 + p * p;
      const auto dg22 = [&](double dp, double dq) {
        return 2.0 * q * dq / g11 - q * q * 2.0 * p * dp / (g11 * g11);
      };
      d.dg11_dx = 2.0 * p * m.hxx;
      d.dg11_dy = 2.0 * p * m.hxy;
      d.dg22_dx = dg22(m.hxx, m.hxy);
      d.dg22_dy = dg22(m.hxy, m.hyy);
      return d;
    }
    case ChartKind::StereoNorth:
    case ChartKind::StereoSouth: {
      // Conformal factor 4 / (1 + |s|^2)^2.
      const double den = 1.0 + s.squaredNorm();
      const double c = -16.0 / (den * den * den);
      d.dg11_dx = d.dg22_dx = c * s.x();
      d.dg11_dy = d.dg22_dy = c * s.y();
      return d;
    }
    case ChartKind::Custom: {
      const auto metric = [&](const Vec2& p) {
        const auto t = tangents(p);
        return metric_from_tangents(t[0], t[1]);
      };
      const Vec2 ex(kMetricStep, 0.0), ey(0.0, kMetricStep);
      const auto mxp = metric(s + ex), mxm = metric(s - ex);
      const auto myp = metric(s + ey), mym = metric(s - ey);
      d.dg11_dx = (mxp.g11 - mxm.g11) / (2.0 * kMetricStep);
      d.dg22_dx = (mxp.g22 - mxm.g22) / (2.0 * kMetricStep);
      d.dg11_dy = (myp.g11 - mym.g11) / (2.0 * kMetricStep);
      d.dg22_dy = (myp.g22 - mym.g22) / (2.0 * kMetricStep);
      return d;
    }
  }
  return d;
}

PdeCoefficients pde_coefficients(const MetricData& m, const Vec2& w_hat, double gamma) {
  PdeCoefficients c;
  c.K = Vec2(m.sqrt_det_g * m.inv_g11, m.sqrt_det_g * m.inv_g22);
  c.w_tilde = Vec2(m.sqrt_det_g * m.inv_sqrt_g11 * w_hat.x(), m.sqrt_det_g * m.inv_sqrt_g22 * w_hat.y());
  c.gamma_tilde = m.sqrt_det_g * gamma;
  c.weight = m.sqrt_det_g;
  return c;
}

PdeCoefficients pde_coefficients_at(const Chart& chart, const Vec2& s, const Vec2& w_hat,
                                    double gamma) {
  return pde_coefficients(chart.metric_at(s), w_hat, gamma);
}

double anisotropy(double g11, double g22) {
  const double hi = std::max(g11, g22), lo = std::min(g11, g22);
  return std::sqrt(hi * hi * hi / lo);
}

double anisotropy_at(const Chart& chart, const Vec2& s) {
  const auto m = chart.metric_at(s);
  return anisotropy(m.g11, m.g22);
}

double metric_condition_at(const Chart& chart, const Vec2& s) {
  const auto m = chart.metric_at(s);
  return std::max(m.g11, m.g22) / std::min(m.g11, m.g22);
}

}  // namespace ivem
