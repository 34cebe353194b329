#pragma once

// Closed-form reference surface of general type with eps = -1:
//   z(t, s) = (sin 2t cos 2s / 2, sin 2t sin 2s / 2, sin t cos s, sin t sin s)
// on pi/3 < t < 2pi/3, with canonical parameters u = 3^(1/4) t, v = 3^(1/4) s.

#include <cmath>
#include <numbers>
#include <string>

#include "minlor/error.hpp"
#include "minlor/frame_synthesizer.hpp"
#include "minlor/grid.hpp"
#include "minlor/neutral.hpp"
#include "minlor/null_curves.hpp"
#include "minlor/scalar_field.hpp"
#include "minlor/surface.hpp"

namespace minlor::gallery {

inline const double kScale = std::pow(3.0, 0.25);  // u = kScale * t
inline constexpr double kPi = std::numbers::pi;

inline constexpr const char* kMuExpression = "2/(1-4*cos(u/3^0.25)^2)^1.5";
inline constexpr const char* kNuExpression = "(1+2*cos(u/3^0.25)^2)/(sin(u/3^0.25)^2*(1-4*cos(u/3^0.25)^2)^1.5)";

/// Margin (in t) from the singular lines t = pi/3, 2pi/3 for the field domain.
inline constexpr double kFieldMargin = 0.01;
/// Margin used for sample grids.
inline constexpr double kGuardMargin = 0.15;
inline constexpr double kSRange = 3.0;

inline NeutralVector surface_closed_form(double t, double s) {
  using std::cos, std::sin;
  return {0.5 * sin(2 * t) * cos(2 * s), 0.5 * sin(2 * t) * sin(2 * s), sin(t) * cos(s), sin(t) * sin(s)};
}

inline Jet2 jet_closed_form(double t, double s) {
  using std::cos, std::sin;
  Jet2 j;
  j.z = surface_closed_form(t, s);
  j.z_u = {cos(2 * t) * cos(2 * s), cos(2 * t) * sin(2 * s), cos(t) * cos(s), cos(t) * sin(s)};
  j.z_v = {-sin(2 * t) * sin(2 * s), sin(2 * t) * cos(2 * s), -sin(t) * sin(s), sin(t) * cos(s)};
  j.z_uu = {-2 * sin(2 * t) * cos(2 * s), -2 * sin(2 * t) * sin(2 * s), -sin(t) * cos(s), -sin(t) * sin(s)};
  j.z_vv = j.z_uu;
  j.z_uv = {-2 * cos(2 * t) * sin(2 * s), 2 * cos(2 * t) * cos(2 * s), -cos(t) * sin(s), cos(t) * cos(s)};
  return j;
}

/// Geometric frame at (t, s), with x = z_t / |z_t|.
inline FrameState frame_closed_form(double t, double s) {
  using std::cos, std::sin;
  const double w = 1.0 / (sin(t) * std::sqrt(1.0 - 4.0 * cos(t) * cos(t)));
  FrameState f;
  f.x = w * NeutralVector(cos(2 * t) * cos(2 * s), cos(2 * t) * sin(2 * s), cos(t) * cos(s), cos(t) * sin(s));
  f.y = w * NeutralVector(-sin(2 * t) * sin(2 * s), sin(2 * t) * cos(2 * s), -sin(t) * sin(s), sin(t) * cos(s));
  f.n1 = w * NeutralVector(cos(t) * cos(2 * s), cos(t) * sin(2 * s), cos(2 * t) * cos(s), cos(2 * t) * sin(s));
  f.n2 = w * NeutralVector(sin(t) * sin(2 * s), -sin(t) * cos(2 * s), sin(2 * t) * sin(s), -sin(2 * t) * cos(s));
  f.at_point = {kScale * t, kScale * s};
  return f;
}

inline double mu_closed_form(double t) {
  const double c = std::cos(t);
  return 2.0 / std::pow(1.0 - 4.0 * c * c, 1.5);
}

inline double nu_closed_form(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return (1.0 + 2.0 * c * c) / (s * s * std::pow(1.0 - 4.0 * c * c, 1.5));
}

/// Connection coefficients in canonical parameters.
inline ConnectionCoefficients connection_closed_form(double t) {
  const double c = std::cos(t), s = std::sin(t);
  const double q = std::pow(1.0 - 4.0 * c * c, 1.5);
  return {0.0, -c * (5.0 - 8.0 * c * c) / (s * s * q), 0.0, -4.0 * c / q};
}

/// Chart z(lambda p, lambda q) with analytic derivatives. lambda = 1 gives
/// (t, s); lambda = 1/kScale gives the canonical (u, v).
inline SurfaceChart closed_form_chart(double lambda, double t_margin = kFieldMargin) {
  const Rect domain{(kPi / 3 + t_margin) / lambda, (2 * kPi / 3 - t_margin) / lambda, -kSRange / lambda,
                    kSRange / lambda};
  auto pos = [lambda](double p, double q) { return surface_closed_form(lambda * p, lambda * q); };
  auto jet = [lambda](double p, double q) {
    Jet2 j = jet_closed_form(lambda * p, lambda * q);
    const double l2 = lambda * lambda;
    j.z_u *= lambda;
    j.z_v *= lambda;
    j.z_uu *= l2;
    j.z_uv *= l2;
    j.z_vv *= l2;
    return j;
  };
  return SurfaceChart::analytic(pos, jet, domain, "closed form, t = " + std::to_string(lambda) + " p");
}

inline SurfaceChart chart_ts() { return closed_form_chart(1.0); }
inline SurfaceChart chart_uv() { return closed_form_chart(1.0 / kScale); }

struct ExampleBundle {
  ScalarField mu;
  ScalarField nu;
  Sign epsilon = Sign::minus();
  Rect domain;          // field domain in (u, v)
  Rect guarded_domain;  // sample domain in (u, v)

  NeutralVector surface(double t, double s) const { return surface_closed_form(t, s); }
  FrameState frame(double t, double s) const { return frame_closed_form(t, s); }
  /// K = -eps (mu^2 + nu^2) and kappa = -2 mu nu as fields.
  ScalarField K() const {
    const double eps = epsilon.real();
    return combine("K", [eps](double m, double n) { return -eps * (m * m + n * n); }, mu, nu);
  }
  ScalarField kappa() const {
    return combine("kappa", [](double m, double n) { return -2.0 * m * n; }, mu, nu);
  }
};

inline Rect u_rect(double t_margin, double s_range) {
  return {kScale * (kPi / 3 + t_margin), kScale * (2 * kPi / 3 - t_margin), -kScale * s_range, kScale * s_range};
}

/// `fd_step` overrides the finite-difference step of both fields.
inline ExampleBundle example(std::optional<double> fd_step = std::nullopt) {
  const Rect domain = u_rect(kFieldMargin, kSRange);
  ExampleBundle b{ScalarField::parse(kMuExpression, domain, fd_step), ScalarField::parse(kNuExpression, domain, fd_step),
                  Sign::minus(), domain, u_rect(kGuardMargin, 1.0)};
  return b;
}

/// Grid over the guarded t-range (canonical coordinates), v in [-1, 1] * kScale.
inline std::vector<UV> guarded_grid(std::size_t nu, std::size_t nv) {
  return uniform_samples(u_rect(kGuardMargin, 1.0), nu, nv);
}

inline double u0() { return kScale * kPi / 2; }
inline FrameState initial_frame() { return frame_closed_form(kPi / 2, 0.0); }
inline NeutralVector initial_point() { return surface_closed_form(kPi / 2, 0.0); }
inline GridSpec synthesis_grid(double h = 1e-3, std::size_t n = 200) { return {u0(), 0.0, h, n, n}; }

/// Closed form sampled on a canonical (u, v) lattice, plus a constant offset.
inline SynthesizedSurface sampled_closed_form(const GridSpec& g, const NeutralVector& offset = {}) {
  g.validate();
  SynthesizedSurface s;
  s.grid = g;
  s.epsilon = Sign::minus();
  s.frames = Grid<FrameState>(g.nu, g.nv);
  s.positions = Grid<NeutralVector>(g.nu, g.nv);
  s.displacements = Grid<NeutralVector>(g.nu, g.nv);
  s.metric_factor = Grid<double>(g.nu, g.nv);
  const NeutralVector p0 = surface_closed_form(g.u0 / kScale, g.v0 / kScale);
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) {
      const double t = g.u(i) / kScale, sp = g.v(j) / kScale;
      const NeutralVector z = surface_closed_form(t, sp);
      s.positions.at(i, j) = z + offset;
      s.displacements.at(i, j) = z - p0;
      s.frames.at(i, j) = frame_closed_form(t, sp);
      const double m = mu_closed_form(t), n = nu_closed_form(t);
      s.metric_factor.at(i, j) = std::pow(std::abs(m * m - n * n), -0.25);
    }
  return s;
}

/// Max Euclidean distance between stored positions and the closed form.
/// With `align`, the best constant translation (the mean offset) is removed first.
inline double oracle_compare(const SynthesizedSurface& s, bool align) {
  const GridSpec& g = s.grid;
  if (!s.has_positions() || s.positions.nu() != g.nu || s.positions.nv() != g.nv) {
    throw Error(ErrorKind::grid_mismatch, "surface positions do not match its grid");
  }
  NeutralVector C;
  if (align) {
    for (std::size_t i = 0; i < g.nu; ++i)
      for (std::size_t j = 0; j < g.nv; ++j)
        C += s.positions.at(i, j) - surface_closed_form(g.u(i) / kScale, g.v(j) / kScale);
    C = C / static_cast<double>(g.size());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j)
      worst = std::max(worst, euclid_norm(s.positions.at(i, j) - C -
                                          surface_closed_form(g.u(i) / kScale, g.v(j) / kScale)));
  return worst;
}

/// Max entry difference between stored frames and the closed-form frames.
inline double frame_compare(const SynthesizedSurface& s) {
  const GridSpec& g = s.grid;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) {
      const FrameState a = s.frames.at(i, j);
      const FrameState b = frame_closed_form(g.u(i) / kScale, g.v(j) / kScale);
      worst = std::max({worst, max_abs(a.x - b.x), max_abs(a.y - b.y), max_abs(a.n1 - b.n1), max_abs(a.n2 - b.n2)});
    }
  return worst;
}

/// Null curves whose sum, in (u, v) = (t, s), is the closed-form surface.
inline NullCurvePair null_pair(double half_width = 0.5) {
  using std::cos, std::sin;
  const Interval I{kPi / 2 - half_width, kPi / 2 + half_width};
  Curve alpha(
      [](double p) { return NeutralVector(0.25 * sin(2 * p), -0.25 * cos(2 * p), 0.5 * sin(p), -0.5 * cos(p)); }, I,
      [](double p) { return NeutralVector(0.5 * cos(2 * p), 0.5 * sin(2 * p), 0.5 * cos(p), 0.5 * sin(p)); },
      [](double p) { return NeutralVector(-sin(2 * p), cos(2 * p), -0.5 * sin(p), 0.5 * cos(p)); }, "alpha");
  Curve beta(
      [](double q) { return NeutralVector(0.25 * sin(2 * q), 0.25 * cos(2 * q), 0.5 * sin(q), 0.5 * cos(q)); }, I,
      [](double q) { return NeutralVector(0.5 * cos(2 * q), -0.5 * sin(2 * q), 0.5 * cos(q), -0.5 * sin(q)); },
      [](double q) { return NeutralVector(-sin(2 * q), -cos(2 * q), -0.5 * sin(q), -0.5 * cos(q)); }, "beta");
  return {alpha, beta};
}

}  // namespace minlor::gallery
