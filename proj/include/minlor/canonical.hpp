#pragma once

// Geometric frame of a general-type minimal Lorentz surface and the
// invariants mu, nu, epsilon; canonical-parameter checks.

#include <cmath>
#include <span>
#include <vector>

#include "minlor/error.hpp"
#include "minlor/neutral.hpp"
#include "minlor/scalar_field.hpp"
#include "minlor/surface.hpp"

namespace minlor {

struct GeometricFrame {
  NeutralVector x, y, n1, n2;
};

struct GeometricInvariants {
  double mu = 0.0;
  double nu = 0.0;
  Sign epsilon;
  double K = 0.0;
  double kappa = 0.0;
  double phi = 0.0;
  double alpha_ratio = 0.0;  // 2(ac - bd) / (b^2 - a^2 + d^2 - c^2)
  GeometricFrame frame;
};

inline constexpr double kDefaultFrameTol = 1e-10;

/// Rotates the tangent frame by the hyperbolic angle phi with
/// tanh(4 phi) = alpha_ratio so that sigma(x,x) and sigma(x,y) become
/// orthogonal, then normalizes them into n1, n2.
///
/// Signs: nu > 0 and mu > 0 (so kappa = -2 mu nu < 0), and x has a positive
/// first nonzero component.
inline GeometricInvariants extract_frame(const FundamentalData& fd, double tol = kDefaultFrameTol) {
  const double a = fd.a, b = fd.b, c = fd.c, d = fd.d;
  const double K = b * b - a * a + c * c - d * d;
  const double kappa = 2.0 * (b * c - a * d);
  const double disc = K * K - kappa * kappa;
  const CurvatureReport report = curvature_report(fd);
  if (!(disc > tol * (K * K + kappa * kappa)) || disc <= 0.0 || report.first_normal_dim != 2) {
    throw Error(ErrorKind::not_general_type, "point " + describe_point(fd.u, fd.v) +
                                                 " is not of general type (K^2 - kappa^2 = " + std::to_string(disc) +
                                                 ", first normal dim " + std::to_string(report.first_normal_dim) + ")");
  }

  GeometricInvariants inv;
  const double num = 2.0 * (a * c - b * d);
  const double den = b * b - a * a + d * d - c * c;
  inv.alpha_ratio = den != 0.0 ? num / den : 0.0;
  if (std::abs(a * c - b * d) > tol * std::max(1.0, a * a + b * b + c * c + d * d)) {
    const double A = inv.alpha_ratio;
    if (!(std::abs(A) <= 1.0 - 1e-12)) {
      throw Error(ErrorKind::not_general_type,
                  "hyperbolic rotation undefined at " + describe_point(fd.u, fd.v) + " (|A| >= 1)");
    }
    inv.phi = 0.25 * 0.5 * std::log((1.0 + A) / (1.0 - A));
  }

  const double ch = std::cosh(inv.phi), sh = std::sinh(inv.phi);
  NeutralVector xb = ch * fd.x + sh * fd.y;
  NeutralVector yb = sh * fd.x + ch * fd.y;
  auto first_nonzero = [](const NeutralVector& v) {
    for (double s : v.c)
      if (std::abs(s) > 1e-12) return s;
    return 0.0;
  };
  if (first_nonzero(xb) < 0.0) {
    xb = -xb;
    yb = -yb;
  }

  // sigma is bilinear, so the overall sign of (xb, yb) drops out.
  const NeutralVector s_xx = ch * ch * fd.sigma_xx + 2.0 * ch * sh * fd.sigma_xy + sh * sh * fd.sigma_yy;
  const NeutralVector s_xy = ch * sh * fd.sigma_xx + (ch * ch + sh * sh) * fd.sigma_xy + ch * sh * fd.sigma_yy;
  const double q_xx = norm2(s_xx), q_xy = norm2(s_xy);
  if (std::abs(q_xx) <= tol * std::max(1.0, euclid_norm2(s_xx)) ||
      std::abs(q_xy) <= tol * std::max(1.0, euclid_norm2(s_xy))) {
    throw Error(ErrorKind::lightlike_second_form,
                "rotated second fundamental form is lightlike at " + describe_point(fd.u, fd.v));
  }

  inv.nu = std::sqrt(std::abs(q_xx));
  inv.mu = std::sqrt(std::abs(q_xy));
  inv.epsilon = q_xx > 0.0 ? Sign::plus() : Sign::minus();
  inv.frame = {xb, yb, s_xx / inv.nu, s_xy / inv.mu};
  inv.K = -inv.epsilon.real() * (inv.mu * inv.mu + inv.nu * inv.nu);
  inv.kappa = -2.0 * inv.mu * inv.nu;
  return inv;
}

struct CanonicalCheck {
  bool is_canonical = false;
  double constant_c = 0.0;
  double defect = 0.0;  // max | |mu^2 - nu^2| f^4 - c^4 |
};

/// `f` holds the conformal factor at the same points as `invariants`.
inline CanonicalCheck check_canonical(std::span<const GeometricInvariants> invariants, std::span<const double> f,
                                      double tol = 1e-6) {
  if (invariants.empty()) throw Error(ErrorKind::empty_grid, "canonical check needs at least one point");
  if (invariants.size() != f.size()) {
    throw Error(ErrorKind::grid_mismatch, "invariant and conformal-factor grids differ in size");
  }
  std::vector<double> q(invariants.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double mu = invariants[k].mu, nu = invariants[k].nu;
    const double f2 = f[k] * f[k];
    q[k] = std::abs((mu - nu) * (mu + nu)) * f2 * f2;
    mean += q[k];
  }
  mean /= static_cast<double>(q.size());
  CanonicalCheck out;
  for (double x : q) out.defect = std::max(out.defect, std::abs(x - mean));
  out.constant_c = std::pow(mean, 0.25);
  out.is_canonical = out.defect <= tol && std::abs(out.constant_c - 1.0) <= tol;
  return out;
}

/// Runs the analyzer and frame extraction at each sample first.
inline CanonicalCheck check_canonical(const SurfaceChart& chart, std::span<const UV> samples, double tol = 1e-6,
                                      const AnalyzerOptions& opt = {}) {
  if (samples.empty()) throw Error(ErrorKind::empty_grid, "canonical check needs at least one point");
  std::vector<GeometricInvariants> inv;
  std::vector<double> f;
  for (const UV& p : samples) {
    const FundamentalData fd = second_form(chart, p.u, p.v, std::nullopt, opt);
    inv.push_back(extract_frame(fd));
    f.push_back(fd.f);
  }
  return check_canonical(inv, f, tol);
}

struct ConnectionCoefficients {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

inline constexpr double kDefaultSuperconformalTol = 1e-10;

/// Connection coefficients of the surface in canonical parameters, by
/// central differences with the step of `mu`.
inline ConnectionCoefficients gamma_beta_from_invariants(const ScalarField& mu, const ScalarField& nu, double u,
                                                         double v, double tol = kDefaultSuperconformalTol) {
  const double h = mu.fd_step();
  detail::require_stencil(mu, u, v, h);
  detail::require_stencil(nu, u, v, h);

  struct Sample {
    double g;  // |mu^2 - nu^2|^(1/4)
    double L;  // ln|(mu + nu) / (mu - nu)|
  };
  auto sample = [&](double uu, double vv) {
    const double m = mu.eval(uu, vv), n = nu.eval(uu, vv);
    const double dm = m - n, dp = m + n;
    if (std::abs(dm * dp) <= tol) {
      throw Error(ErrorKind::near_superconformal,
                  "|mu^2 - nu^2| <= " + std::to_string(tol) + " at " + describe_point(uu, vv));
    }
    return Sample{std::pow(std::abs(dm * dp), 0.25), std::log(std::abs(dp / dm))};
  };

  const Sample c = sample(u, v);
  const Sample up = sample(u + h, v), um = sample(u - h, v);
  const Sample vp = sample(u, v + h), vm = sample(u, v - h);
  ConnectionCoefficients out;
  out.gamma1 = (vp.g - vm.g) / (2.0 * h);
  out.gamma2 = (up.g - um.g) / (2.0 * h);
  out.beta1 = 0.5 * c.g * (vp.L - vm.L) / (2.0 * h);
  out.beta2 = 0.5 * c.g * (up.L - um.L) / (2.0 * h);
  return out;
}

}  // namespace minlor
