#pragma once

// Local analysis of a Lorentz immersion z(u, v) into the neutral 4-space:
// fundamental forms, second-form coefficients against an orthonormal normal
// frame, curvatures, minimality, and flat containment tests.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minlor/error.hpp"
#include "minlor/expression.hpp"
#include "minlor/grid.hpp"
#include "minlor/neutral.hpp"
#include "minlor/scalar_field.hpp"

namespace minlor {

/// Position and its derivatives up to second order at one parameter point.
struct Jet2 {
  NeutralVector z, z_u, z_v, z_uu, z_uv, z_vv;
};

enum class DerivativeMode { analytic, finite_difference };

class SurfaceChart {
 public:
  using PositionFn = std::function<NeutralVector(double, double)>;
  using JetFn = std::function<Jet2(double, double)>;

  /// Derivatives by central differences of the position with step `fd_step`
  /// (default 1e-4 of the smaller domain extent).
  static SurfaceChart finite_difference(PositionFn position, Rect domain, std::optional<double> fd_step = {},
                                        std::string description = "<callback>") {
    const double h = fd_step.value_or(ScalarField::kDefaultStepFraction * domain.min_extent());
    return SurfaceChart(std::move(position), nullptr, domain, h, std::move(description));
  }

  /// Host-provided derivatives.
  static SurfaceChart analytic(PositionFn position, JetFn jet, Rect domain, std::string description = "<callback>") {
    return SurfaceChart(std::move(position), std::move(jet), domain, 0.0, std::move(description));
  }

  /// Four component expressions in (u, v); finite-difference derivatives.
  static SurfaceChart from_expressions(const std::array<std::string, 4>& components, Rect domain,
                                       std::optional<double> fd_step = {},
                                       const std::map<std::string, double>& params = {}) {
    std::array<expr::Expression, 4> comps;
    std::string desc = "(";
    for (std::size_t k = 0; k < 4; ++k) {
      comps[k] = expr::parse_bound(components[k], params);
      desc += comps[k].to_string() + (k < 3 ? ", " : ")");
    }
    PositionFn fn = [comps](double u, double v) {
      return NeutralVector(comps[0](u, v), comps[1](u, v), comps[2](u, v), comps[3](u, v));
    };
    return finite_difference(std::move(fn), domain, fd_step, desc);
  }

  NeutralVector position(double u, double v) const {
    if (!domain_.contains(u, v)) {
      throw Error(ErrorKind::out_of_domain, "point " + describe_point(u, v) + " outside chart domain");
    }
    NeutralVector p = position_(u, v);
    if (!p.is_finite()) throw Error(ErrorKind::non_finite, "chart position non-finite at " + describe_point(u, v));
    return p;
  }

  DerivativeMode mode() const { return jet_ ? DerivativeMode::analytic : DerivativeMode::finite_difference; }
  const Rect& domain() const { return domain_; }
  double fd_step() const { return fd_step_; }
  const std::string& description() const { return description_; }
  const JetFn& jet_callback() const { return jet_; }

 private:
  SurfaceChart(PositionFn position, JetFn jet, Rect domain, double fd_step, std::string description)
      : position_(std::move(position)), jet_(std::move(jet)), domain_(domain), fd_step_(fd_step),
        description_(std::move(description)) {
    if (!(domain_.extent_u() > 0.0) || !(domain_.extent_v() > 0.0)) {
      throw Error(ErrorKind::precondition, "chart domain must have positive area");
    }
    if (!jet_ && !(fd_step_ > 0.0 && fd_step_ < domain_.min_extent() / 4.0)) {
      throw Error(ErrorKind::precondition, "fd_step must lie in (0, min extent / 4)");
    }
  }

  PositionFn position_;
  JetFn jet_;
  Rect domain_;
  double fd_step_;
  std::string description_;
};

inline constexpr double kDegenerateTangentNorm = 1e-12;

/// Second-order jet. Finite-difference mode uses three-point central
/// differences and the symmetric four-point cross stencil for z_uv.
inline Jet2 jet(const SurfaceChart& chart, double u, double v) {
  Jet2 j;
  if (chart.mode() == DerivativeMode::analytic) {
    if (!chart.domain().contains(u, v)) {
      throw Error(ErrorKind::out_of_domain, "point " + describe_point(u, v) + " outside chart domain");
    }
    j = chart.jet_callback()(u, v);
  } else {
    const double h = chart.fd_step();
    const Rect& d = chart.domain();
    if (!d.contains(u - h, v - h) || !d.contains(u + h, v + h)) {
      throw Error(ErrorKind::out_of_domain, "jet stencil at " + describe_point(u, v) + " leaves chart domain");
    }
    const NeutralVector c = chart.position(u, v);
    const NeutralVector up = chart.position(u + h, v), um = chart.position(u - h, v);
    const NeutralVector vp = chart.position(u, v + h), vm = chart.position(u, v - h);
    const NeutralVector pp = chart.position(u + h, v + h), pm = chart.position(u + h, v - h);
    const NeutralVector mp = chart.position(u - h, v + h), mm = chart.position(u - h, v - h);
    j.z = c;
    j.z_u = (up - um) / (2.0 * h);
    j.z_v = (vp - vm) / (2.0 * h);
    j.z_uu = (up - 2.0 * c + um) / (h * h);
    j.z_vv = (vp - 2.0 * c + vm) / (h * h);
    j.z_uv = ((pp - pm) - (mp - mm)) / (4.0 * h * h);
  }
  if (euclid_norm(j.z_u) < kDegenerateTangentNorm || euclid_norm(j.z_v) < kDegenerateTangentNorm) {
    throw Error(ErrorKind::degenerate_tangent, "z_u or z_v vanishes at " + describe_point(u, v));
  }
  return j;
}

struct FirstForm {
  double E = 0.0;
  double F = 0.0;
  double G = 0.0;
};

/// Throws non_lorentzian unless EG - F^2 < 0.
inline FirstForm first_form(const Jet2& j) {
  FirstForm ff{inner(j.z_u, j.z_u), inner(j.z_u, j.z_v), inner(j.z_v, j.z_v)};
  if (!(ff.E * ff.G - ff.F * ff.F < 0.0)) {
    throw Error(ErrorKind::non_lorentzian, "induced metric is not Lorentzian (EG - F^2 = " +
                                               std::to_string(ff.E * ff.G - ff.F * ff.F) + ")");
  }
  return ff;
}

struct AnalyzerOptions {
  /// |F| and |E + G| must not exceed this times max(|E|, 1).
  double isothermal_tol = 1e-8;
  /// A projected normal candidate P is usable when |<P,P>| > normal_tol * max(1, |P|_E^2).
  double normal_tol = 1e-3;
  /// Rank and degeneracy cutoff used by curvature_report.
  double degenerate_tol = 1e-7;
};

/// First and second fundamental data at an isothermal point, against the
/// tangent frame x = z_u / f, y = z_v / f and a normal frame e1 (spacelike),
/// e2 (timelike) with det(x, y, e1, e2) > 0.
struct FundamentalData {
  double u = 0.0;
  double v = 0.0;
  double E = 0.0, F = 0.0, G = 0.0;
  double f = 0.0;
  NeutralVector x, y, e1, e2;
  // sigma(x,x) = a e1 + b e2, sigma(x,y) = c e1 + d e2, sigma(y,y) = a_yy e1 + b_yy e2
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double a_yy = 0.0, b_yy = 0.0;
  NeutralVector sigma_xx, sigma_xy, sigma_yy;
  double gamma1 = 0.0, gamma2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
};

namespace detail {

inline NeutralVector tangent_reject(const NeutralVector& w, const NeutralVector& x, const NeutralVector& y) {
  // <x,x> = 1, <y,y> = -1
  return w - inner(w, x) * x + inner(w, y) * y;
}

inline NeutralVector basis_vector(std::size_t k) {
  NeutralVector e;
  e[k] = 1.0;
  return e;
}

}  // namespace detail

/// Coefficients of the second fundamental form from a jet. See FundamentalData.
inline FundamentalData second_form(const Jet2& j, double u, double v,
                                   const std::optional<NeutralVector>& normal_seed = std::nullopt,
                                   const AnalyzerOptions& opt = {}) {
  const FirstForm ff = first_form(j);
  const double scale = std::max(std::abs(ff.E), 1.0);
  if (!(ff.E > 0.0) || std::abs(ff.F) > opt.isothermal_tol * scale ||
      std::abs(ff.E + ff.G) > opt.isothermal_tol * scale) {
    throw Error(ErrorKind::not_isothermal, "chart is not isothermal at " + describe_point(u, v) +
                                               " (E=" + std::to_string(ff.E) + ", F=" + std::to_string(ff.F) +
                                               ", G=" + std::to_string(ff.G) + ")");
  }

  FundamentalData fd;
  fd.u = u;
  fd.v = v;
  fd.E = ff.E;
  fd.F = ff.F;
  fd.G = ff.G;
  fd.f = std::sqrt(ff.E);
  const double f = fd.f;
  fd.x = j.z_u / f;
  fd.y = j.z_v / f;

  const auto& x = fd.x;
  const auto& y = fd.y;
  fd.sigma_xx = detail::tangent_reject(j.z_uu, x, y) / ff.E;
  fd.sigma_xy = detail::tangent_reject(j.z_uv, x, y) / ff.E;
  fd.sigma_yy = detail::tangent_reject(j.z_vv, x, y) / ff.E;

  // Normal frame: the first usable projected candidate, then Gram-Schmidt.
  std::vector<NeutralVector> candidates;
  if (normal_seed) candidates.push_back(*normal_seed);
  for (std::size_t k = 0; k < 4; ++k) candidates.push_back(detail::basis_vector(k));

  std::optional<std::size_t> first_idx;
  NeutralVector first, second;
  double first_raw_norm = 0.0;
  for (std::size_t k = 0; k < candidates.size() && !first_idx; ++k) {
    const NeutralVector p = detail::tangent_reject(candidates[k], x, y);
    const double q = norm2(p);
    if (std::abs(q) > opt.normal_tol * std::max(1.0, euclid_norm2(p))) {
      first_idx = k;
      first_raw_norm = std::sqrt(std::abs(q));
      first = p / first_raw_norm;
    }
  }
  if (!first_idx) {
    throw Error(ErrorKind::normal_frame_degenerate, "no non-lightlike normal candidate at " + describe_point(u, v));
  }
  const double first_sign = norm2(first) > 0.0 ? 1.0 : -1.0;
  bool have_second = false;
  for (std::size_t k = 0; k < candidates.size() && !have_second; ++k) {
    if (k == *first_idx) continue;
    NeutralVector p = detail::tangent_reject(candidates[k], x, y);
    p = p - (inner(p, first) / norm2(first)) * first;
    const double q = norm2(p);
    if (std::abs(q) > opt.normal_tol * std::max(1.0, euclid_norm2(p)) && q * first_sign < 0.0) {
      second = p / std::sqrt(std::abs(q));
      have_second = true;
    }
  }
  if (!have_second) {
    throw Error(ErrorKind::normal_frame_degenerate, "could not complete the normal frame at " + describe_point(u, v));
  }

  const bool first_is_e1 = first_sign > 0.0;
  fd.e1 = first_is_e1 ? first : second;
  fd.e2 = first_is_e1 ? second : first;
  double first_orientation = 1.0;
  if (det4(x, y, fd.e1, fd.e2) < 0.0) {
    fd.e2 = -fd.e2;
    if (!first_is_e1) first_orientation = -1.0;
  }

  fd.a = inner(fd.sigma_xx, fd.e1);
  fd.b = -inner(fd.sigma_xx, fd.e2);
  fd.c = inner(fd.sigma_xy, fd.e1);
  fd.d = -inner(fd.sigma_xy, fd.e2);
  fd.a_yy = inner(fd.sigma_yy, fd.e1);
  fd.b_yy = -inner(fd.sigma_yy, fd.e2);

  // Tangent connection from f_u = <z_uu, z_u>/f and f_v = <z_uv, z_u>/f.
  const double f_u = inner(j.z_uu, j.z_u) / f;
  const double f_v = inner(j.z_uv, j.z_u) / f;
  fd.gamma1 = -f_v / ff.E;
  fd.gamma2 = -f_u / ff.E;

  // Normal connection. The first frame vector is s * P(w) / |P(w)| for a
  // constant w, so <d(e_first), e_second> only sees the normal parts of
  // x_u = z_uu/f + ..., y_u = z_uv/f + ... and likewise in v.
  const NeutralVector& w = candidates[*first_idx];
  const NeutralVector& e_second = first_is_e1 ? fd.e2 : fd.e1;
  const double wx = inner(w, x), wy = inner(w, y);
  const double du = first_orientation *
                    (-wx * inner(j.z_uu, e_second) + wy * inner(j.z_uv, e_second)) / (f * first_raw_norm);
  const double dv = first_orientation *
                    (-wx * inner(j.z_uv, e_second) + wy * inner(j.z_vv, e_second)) / (f * first_raw_norm);
  // beta1 = <d_x e2, e1> = -<d_x e1, e2>
  const double sgn = first_is_e1 ? -1.0 : 1.0;
  fd.beta1 = sgn * du / f;
  fd.beta2 = sgn * dv / f;
  return fd;
}

inline FundamentalData second_form(const SurfaceChart& chart, double u, double v,
                                   const std::optional<NeutralVector>& normal_seed = std::nullopt,
                                   const AnalyzerOptions& opt = {}) {
  return second_form(jet(chart, u, v), u, v, normal_seed, opt);
}

/// Replaces e1 by -e1 (which = 1) or e2 by -e2 (which = 2) and transforms the
/// coefficients accordingly. The orientation convention is not re-imposed.
inline FundamentalData flip_normal(FundamentalData fd, int which) {
  if (which == 1) {
    fd.e1 = -fd.e1;
    fd.a = -fd.a;
    fd.c = -fd.c;
    fd.a_yy = -fd.a_yy;
  } else {
    fd.e2 = -fd.e2;
    fd.b = -fd.b;
    fd.d = -fd.d;
    fd.b_yy = -fd.b_yy;
  }
  fd.beta1 = -fd.beta1;
  fd.beta2 = -fd.beta2;
  return fd;
}

enum class SurfaceClass { general_type, super_conformal, third_class, degenerate_point };

inline std::string_view to_string(SurfaceClass c) {
  switch (c) {
    case SurfaceClass::general_type: return "general_type";
    case SurfaceClass::super_conformal: return "super_conformal";
    case SurfaceClass::third_class: return "third_class";
    case SurfaceClass::degenerate_point: return "degenerate_point";
  }
  return "unknown";
}

struct CurvatureReport {
  double K = 0.0;
  double kappa = 0.0;
  NeutralVector H_vector;
  double H_norm2 = 0.0;
  double discriminant = 0.0;
  int first_normal_dim = 0;
  SurfaceClass surface_class = SurfaceClass::degenerate_point;
};

inline constexpr double kDefaultDegenerateTol = 1e-7;

/// K = b^2 - a^2 + c^2 - d^2, kappa = 2(bc - ad), H = (sigma(x,x) - sigma(y,y))/2.
inline CurvatureReport curvature_report(const FundamentalData& fd, double tol_deg = kDefaultDegenerateTol) {
  CurvatureReport r;
  const double a = fd.a, b = fd.b, c = fd.c, d = fd.d;
  r.K = b * b - a * a + c * c - d * d;
  r.kappa = 2.0 * (b * c - a * d);
  r.H_vector = 0.5 * (fd.sigma_xx - fd.sigma_yy);
  r.H_norm2 = norm2(r.H_vector);
  r.discriminant = r.K * r.K - r.kappa * r.kappa;

  // Rank of {sigma(x,x), sigma(x,y), sigma(y,y)} in the normal plane.
  Eigen::Matrix<double, 3, 2> m;
  m << a, b, c, d, fd.a_yy, fd.b_yy;
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>>(m).singularValues();
  const double cutoff = tol_deg * std::max(1.0, s(0));
  r.first_normal_dim = (s(0) > tol_deg ? 1 : 0) + (s(1) > cutoff ? 1 : 0);

  if (std::abs(r.K) <= tol_deg && std::abs(r.kappa) <= tol_deg) {
    r.surface_class = SurfaceClass::degenerate_point;
  } else if (r.discriminant > tol_deg) {
    r.surface_class = SurfaceClass::general_type;
  } else if (r.discriminant < -tol_deg) {
    r.surface_class = SurfaceClass::third_class;
  } else {
    r.surface_class = SurfaceClass::super_conformal;
  }
  return r;
}

/// Max over the grid of the Euclidean norm of the mean curvature vector.
inline double minimality_residual(const SurfaceChart& chart, std::span<const UV> grid,
                                  const AnalyzerOptions& opt = {}) {
  if (grid.empty()) throw Error(ErrorKind::empty_grid, "minimality residual needs at least one point");
  double worst = 0.0;
  for (const UV& p : grid) {
    const FundamentalData fd = second_form(chart, p.u, p.v, std::nullopt, opt);
    worst = std::max(worst, euclid_norm(0.5 * (fd.sigma_xx - fd.sigma_yy)));
  }
  return worst;
}

enum class HyperplaneCharacter { degenerate, non_degenerate };

struct HyperplaneFit {
  bool contained = false;
  double residual = 0.0;  // max Euclidean distance of a sample to the fitted hyperplane
  std::optional<NeutralVector> normal;  // N with the hyperplane {p : <N, p - centroid> = 0}
  std::optional<HyperplaneCharacter> character;
  NeutralVector centroid;
};

/// Least-squares affine hyperplane through sampled positions.
inline HyperplaneFit hyperplane_containment(const SurfaceChart& chart, std::span<const UV> samples, double tol,
                                            double causal_tol = kDefaultCausalTol) {
  if (samples.size() < 5) {
    throw Error(ErrorKind::insufficient_samples, "hyperplane fit needs at least 5 samples");
  }
  std::vector<NeutralVector> pts;
  pts.reserve(samples.size());
  NeutralVector centroid;
  for (const UV& s : samples) {
    pts.push_back(chart.position(s.u, s.v));
    centroid += pts.back();
  }
  centroid = centroid / static_cast<double>(pts.size());

  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 4);
  for (std::size_t r = 0; r < pts.size(); ++r)
    for (std::size_t k = 0; k < 4; ++k)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = pts[r][k] - centroid[k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::Vector4d n = svd.matrixV().col(3);

  HyperplaneFit fit;
  fit.centroid = centroid;
  for (std::size_t r = 0; r < pts.size(); ++r) {
    double dist = 0.0;
    for (std::size_t k = 0; k < 4; ++k) dist += n(static_cast<Eigen::Index>(k)) * (pts[r][k] - centroid[k]);
    fit.residual = std::max(fit.residual, std::abs(dist));
  }
  fit.contained = fit.residual <= tol;
  if (fit.contained) {
    // Euclidean normal n corresponds to the neutral normal N = diag(1,1,-1,-1) n.
    const NeutralVector normal(n(0), n(1), -n(2), -n(3));
    fit.normal = normal;
    fit.character = causal_character(normal, causal_tol) == CausalCharacter::lightlike
                        ? HyperplaneCharacter::degenerate
                        : HyperplaneCharacter::non_degenerate;
  }
  return fit;
}

}  // namespace minlor
