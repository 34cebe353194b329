#pragma once

// Pointwise residuals of the natural hyperbolic systems in (mu, nu) and in
// (K, kappa), and conversions between the two sets of unknowns.

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "minlor/error.hpp"
#include "minlor/grid.hpp"
#include "minlor/neutral.hpp"
#include "minlor/scalar_field.hpp"

namespace minlor {

inline constexpr double kResidualSuperconformalTol = 1e-10;

struct SignPattern {
  int sum = 0;   // sign of mu + nu
  int diff = 0;  // sign of mu - nu
};

struct ResidualReport {
  std::vector<UV> grid;
  std::vector<double> r1;
  std::vector<double> r2;
  double r1_max = 0.0;
  double r2_max = 0.0;
  Sign epsilon;
  double fd_step = 0.0;
  std::vector<SignPattern> signs;  // filled by residual_mu_nu only

  double max() const { return std::max(r1_max, r2_max); }
};

namespace detail {

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

inline void finish(ResidualReport& r) {
  r.r1_max = 0.0;
  r.r2_max = 0.0;
  for (double x : r.r1) r.r1_max = std::max(r.r1_max, std::abs(x));
  for (double x : r.r2) r.r2_max = std::max(r.r2_max, std::abs(x));
}

}  // namespace detail

/// r1 = sqrt|mu^2-nu^2| Lap ln|mu^2-nu^2| + 4 eps (mu^2+nu^2)
/// r2 = sqrt|mu^2-nu^2| Lap ln|(mu+nu)/(mu-nu)| + 4 eps mu nu
/// with Lap = d^2/du^2 - d^2/dv^2 on the step of `mu`.
inline ResidualReport residual_mu_nu(const ScalarField& mu, const ScalarField& nu, Sign epsilon,
                                     std::span<const UV> grid, double tol = kResidualSuperconformalTol) {
  if (grid.empty()) throw Error(ErrorKind::empty_grid, "residual grid is empty");
  auto guarded = [tol](double m, double n, double u, double v) {
    const double q = (m - n) * (m + n);
    if (std::abs(q) <= tol) {
      throw Error(ErrorKind::superconformal_locus, "|mu^2 - nu^2| <= tol at " + describe_point(u, v));
    }
    return q;
  };
  const ScalarField log_q = ScalarField::from_callback(
      [mu, nu, guarded](double u, double v) { return std::log(std::abs(guarded(mu.eval(u, v), nu.eval(u, v), u, v))); },
      mu.domain().intersect(nu.domain()), mu.fd_step(), "ln|mu^2-nu^2|");
  const ScalarField log_ratio = ScalarField::from_callback(
      [mu, nu, guarded](double u, double v) {
        const double m = mu.eval(u, v), n = nu.eval(u, v);
        guarded(m, n, u, v);
        return std::log(std::abs((m + n) / (m - n)));
      },
      log_q.domain(), mu.fd_step(), "ln|(mu+nu)/(mu-nu)|");

  const double eps = epsilon.real();
  ResidualReport rep;
  rep.grid.assign(grid.begin(), grid.end());
  rep.epsilon = epsilon;
  rep.fd_step = mu.fd_step();
  for (const UV& p : grid) {
    const double m = mu.eval(p.u, p.v), n = nu.eval(p.u, p.v);
    const double root = std::sqrt(std::abs(guarded(m, n, p.u, p.v)));
    rep.r1.push_back(root * hyperbolic_laplacian(log_q, p.u, p.v) + 4.0 * eps * (m * m + n * n));
    rep.r2.push_back(root * hyperbolic_laplacian(log_ratio, p.u, p.v) + 4.0 * eps * m * n);
    rep.signs.push_back({detail::sign_of(m + n), detail::sign_of(m - n)});
  }
  detail::finish(rep);
  return rep;
}

/// r1 = (K^2-kappa^2)^(1/4) Lap ln(K^2-kappa^2) - 8K
/// r2 = (K^2-kappa^2)^(1/4) Lap ln((K+eps kappa)/(K-eps kappa)) - 4 eps kappa
inline ResidualReport residual_K_kappa(const ScalarField& K, const ScalarField& kappa, Sign epsilon,
                                       std::span<const UV> grid, double tol = kResidualSuperconformalTol) {
  if (grid.empty()) throw Error(ErrorKind::empty_grid, "residual grid is empty");
  const double eps = epsilon.real();
  auto disc = [tol](double k, double kp, double u, double v) {
    const double q = (std::abs(k) - std::abs(kp)) * (std::abs(k) + std::abs(kp));
    if (!(q > tol)) {
      throw Error(ErrorKind::superconformal_locus, "K^2 - kappa^2 <= tol at " + describe_point(u, v));
    }
    return q;
  };
  auto ratio = [eps](double k, double kp, double u, double v) {
    const double r = (k + eps * kp) / (k - eps * kp);
    if (!(r > 0.0)) {
      throw Error(ErrorKind::sign_domain, "(K + eps kappa)/(K - eps kappa) <= 0 at " + describe_point(u, v));
    }
    return r;
  };
  const Rect domain = K.domain().intersect(kappa.domain());
  const ScalarField log_q = ScalarField::from_callback(
      [K, kappa, disc](double u, double v) { return std::log(disc(K.eval(u, v), kappa.eval(u, v), u, v)); }, domain,
      K.fd_step(), "ln(K^2-kappa^2)");
  const ScalarField log_ratio = ScalarField::from_callback(
      [K, kappa, disc, ratio](double u, double v) {
        const double k = K.eval(u, v), kp = kappa.eval(u, v);
        disc(k, kp, u, v);
        return std::log(ratio(k, kp, u, v));
      },
      domain, K.fd_step(), "ln((K+eps kappa)/(K-eps kappa))");

  ResidualReport rep;
  rep.grid.assign(grid.begin(), grid.end());
  rep.epsilon = epsilon;
  rep.fd_step = K.fd_step();
  for (const UV& p : grid) {
    const double k = K.eval(p.u, p.v), kp = kappa.eval(p.u, p.v);
    if (!(std::abs(k) > tol) || !(std::abs(kp) > tol)) {
      throw Error(ErrorKind::precondition, "K and kappa must be nonzero; failed at " + describe_point(p.u, p.v));
    }
    const double root = std::pow(disc(k, kp, p.u, p.v), 0.25);
    ratio(k, kp, p.u, p.v);
    rep.r1.push_back(root * hyperbolic_laplacian(log_q, p.u, p.v) - 8.0 * k);
    rep.r2.push_back(root * hyperbolic_laplacian(log_ratio, p.u, p.v) - 4.0 * eps * kp);
  }
  detail::finish(rep);
  return rep;
}

struct CurvaturePair {
  double K = 0.0;
  double kappa = 0.0;
};

struct InvariantPair {
  double mu = 0.0;
  double nu = 0.0;
};

inline CurvaturePair convert_mu_nu_to_K_kappa(double mu, double nu, Sign epsilon) {
  return {-epsilon.real() * (mu * mu + nu * nu), -2.0 * mu * nu};
}

enum class RootBranch { larger_mu, smaller_mu };

/// Inverse of convert_mu_nu_to_K_kappa. mu >= 0 is returned and nu takes
/// the sign that reproduces kappa = -2 mu nu. The default branch has
/// |mu| >= |nu|.
inline InvariantPair convert_K_kappa_to_mu_nu(double K, double kappa, Sign epsilon,
                                              RootBranch branch = RootBranch::larger_mu) {
  const double disc = (std::abs(K) - std::abs(kappa)) * (std::abs(K) + std::abs(kappa));
  const double sum = -epsilon.real() * K;  // mu^2 + nu^2
  if (!(disc > 0.0) || !(sum > 0.0)) {
    throw Error(ErrorKind::inconsistent_curvatures, "no real (mu, nu) for K = " + std::to_string(K) +
                                                        ", kappa = " + std::to_string(kappa));
  }
  const double root = std::sqrt(disc);
  const double big = 0.5 * (sum + root);
  const double small = kappa * kappa / (4.0 * big);  // = (sum - root)/2 without cancellation
  InvariantPair out;
  if (branch == RootBranch::larger_mu) {
    out.mu = std::sqrt(big);
    out.nu = -kappa / (2.0 * out.mu);
  } else {
    out.mu = std::sqrt(small);
    out.nu = out.mu > 0.0 ? -kappa / (2.0 * out.mu) : std::sqrt(big);
  }
  return out;
}

}  // namespace minlor
