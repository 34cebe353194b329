#pragma once

// Builds a minimal Lorentz surface from invariants (mu, nu, eps) by
// integrating the frame system Z_u = A Z, Z_v = B Z (rows of Z: x, y, n1, n2)
// together with z_u = sqrt(E) x, z_v = sqrt(-G) y.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "minlor/canonical.hpp"
#include "minlor/error.hpp"
#include "minlor/grid.hpp"
#include "minlor/neutral.hpp"
#include "minlor/scalar_field.hpp"
#include "minlor/surface.hpp"

namespace minlor {

struct CoefficientMatrices {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
  double sqrt_E = 0.0;  // = sqrt(-G) = |mu^2 - nu^2|^(-1/4)
  double mu = 0.0;
  double nu = 0.0;
  ConnectionCoefficients connection;
};

inline CoefficientMatrices build_matrices(const ScalarField& mu, const ScalarField& nu, Sign epsilon, double u,
                                          double v, double tol = kDefaultSuperconformalTol) {
  CoefficientMatrices m;
  m.mu = mu.eval(u, v);
  m.nu = nu.eval(u, v);
  const double q = std::abs((m.mu - m.nu) * (m.mu + m.nu));
  if (q <= tol) {
    throw Error(ErrorKind::superconformal_locus, "|mu^2 - nu^2| <= tol at " + describe_point(u, v));
  }
  try {
    m.connection = gamma_beta_from_invariants(mu, nu, u, v, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::near_superconformal) throw;
    throw Error(ErrorKind::superconformal_locus, e.what());
  }
  m.sqrt_E = std::pow(q, -0.25);
  const double eps = epsilon.real();
  const double g1 = m.connection.gamma1, g2 = m.connection.gamma2;
  const double b1 = m.connection.beta1, b2 = m.connection.beta2;
  const double mu_ = m.mu, nu_ = m.nu;
  // clang-format off
  m.A << 0.0,       -g1,       nu_, 0.0,
         -g1,       0.0,       0.0, mu_,
         -eps * nu_, 0.0,      0.0, b1,
         0.0,       -eps * mu_, b1, 0.0;
  m.B << 0.0,       -g2,      0.0, mu_,
         -g2,       0.0,      nu_, 0.0,
         0.0,       eps * nu_, 0.0, b2,
         eps * mu_, 0.0,      b2,  0.0;
  // clang-format on
  m.A *= m.sqrt_E;
  m.B *= m.sqrt_E;
  return m;
}

/// Max entry of A_v - B_u + AB - BA over the points, with A_v and B_u taken by
/// central differences on the step of `mu`.
inline double integrability_defect(const ScalarField& mu, const ScalarField& nu, Sign epsilon,
                                   std::span<const UV> grid) {
  if (grid.empty()) throw Error(ErrorKind::empty_grid, "integrability grid is empty");
  const double k = mu.fd_step();
  double worst = 0.0;
  for (const UV& p : grid) {
    const CoefficientMatrices c = build_matrices(mu, nu, epsilon, p.u, p.v);
    const Eigen::Matrix4d A_v =
        (build_matrices(mu, nu, epsilon, p.u, p.v + k).A - build_matrices(mu, nu, epsilon, p.u, p.v - k).A) /
        (2.0 * k);
    const Eigen::Matrix4d B_u =
        (build_matrices(mu, nu, epsilon, p.u + k, p.v).B - build_matrices(mu, nu, epsilon, p.u - k, p.v).B) /
        (2.0 * k);
    const Eigen::Matrix4d R = A_v - B_u + c.A * c.B - c.B * c.A;
    worst = std::max(worst, R.cwiseAbs().maxCoeff());
  }
  return worst;
}

struct FrameState {
  NeutralVector x, y, n1, n2;
  UV at_point;
};

struct IntegrationOptions {
  /// Re-orthonormalize the frame after every step. Off by default so that
  /// the drift stays visible.
  bool reorthonormalize = false;
  /// Skip the transposed sweep; consistency_defect is then reported as NaN.
  bool skip_transposed_sweep = false;
  double blow_up_limit = 1e12;
};

struct SynthesizedSurface {
  GridSpec grid;
  Sign epsilon;
  Grid<FrameState> frames;
  Grid<NeutralVector> positions;  // empty until integrate_positions
  /// Integrated z - z(u0, v0); positions are initial_point + displacement.
  Grid<NeutralVector> displacements;
  /// sqrt(E) at the nodes.
  Grid<double> metric_factor;
  double integrability_defect = 0.0;
  double consistency_defect = 0.0;
  double orthonormality_drift = 0.0;

  bool has_positions() const { return !positions.empty(); }
};

namespace detail {

using FrameMatrix = Eigen::Matrix<double, 4, 4>;

struct AugmentedState {
  FrameMatrix Z;  // rows x, y, n1, n2
  Eigen::RowVector4d z;
};

inline FrameMatrix to_matrix(const FrameState& f) {
  FrameMatrix Z;
  const NeutralVector* rows[4] = {&f.x, &f.y, &f.n1, &f.n2};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) Z(r, c) = (*rows[r])[static_cast<std::size_t>(c)];
  return Z;
}

inline NeutralVector row(const FrameMatrix& Z, int r) { return {Z(r, 0), Z(r, 1), Z(r, 2), Z(r, 3)}; }
inline NeutralVector to_vector(const Eigen::RowVector4d& z) { return {z(0), z(1), z(2), z(3)}; }

inline FrameState to_state(const FrameMatrix& Z, UV at) { return {row(Z, 0), row(Z, 1), row(Z, 2), row(Z, 3), at}; }

// Neutral Gram-Schmidt in the order x, y, n1, n2 with signature (1, -1, eps, -eps).
inline FrameMatrix reorthonormalize(const FrameMatrix& Z, Sign epsilon) {
  const std::array<double, 4> sig{1.0, -1.0, epsilon.real(), -epsilon.real()};
  std::array<NeutralVector, 4> e;
  for (int r = 0; r < 4; ++r) {
    NeutralVector v = row(Z, r);
    for (int k = 0; k < r; ++k) v = v - (inner(v, e[static_cast<std::size_t>(k)]) * sig[static_cast<std::size_t>(k)]) *
                                            e[static_cast<std::size_t>(k)];
    e[static_cast<std::size_t>(r)] = v / std::sqrt(std::abs(norm2(v)));
  }
  FrameMatrix out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = e[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return out;
}

enum class Direction { u, v };

class Stepper {
 public:
  Stepper(const ScalarField& mu, const ScalarField& nu, Sign epsilon, const IntegrationOptions& opt)
      : mu_(mu), nu_(nu), eps_(epsilon), opt_(opt) {}

  struct Slope {
    FrameMatrix M;  // A or B
    double sqrt_E;
  };

  Slope slope(Direction d, double u, double v) const {
    const CoefficientMatrices c = build_matrices(mu_, nu_, eps_, u, v);
    return {d == Direction::u ? c.A : c.B, c.sqrt_E};
  }

  static AugmentedState rhs(Direction d, const Slope& s, const AugmentedState& y) {
    AugmentedState k;
    k.Z = s.M * y.Z;
    k.z = s.sqrt_E * (d == Direction::u ? y.Z.row(0) : y.Z.row(1));
    return k;
  }

  // One classical RK4 step from (u, v) along d with step h. `start` is the
  // slope at the starting point, and the end-point slope is returned through
  // `end` for reuse.
  AugmentedState step(Direction d, double u, double v, double h, const AugmentedState& y, const Slope& start,
                      Slope& end) const {
    const double um = d == Direction::u ? u + 0.5 * h : u, vm = d == Direction::v ? v + 0.5 * h : v;
    const double ue = d == Direction::u ? u + h : u, ve = d == Direction::v ? v + h : v;
    const Slope mid = slope(d, um, vm);
    end = slope(d, ue, ve);
    const AugmentedState k1 = rhs(d, start, y);
    const AugmentedState k2 = rhs(d, mid, {y.Z + 0.5 * h * k1.Z, y.z + 0.5 * h * k1.z});
    const AugmentedState k3 = rhs(d, mid, {y.Z + 0.5 * h * k2.Z, y.z + 0.5 * h * k2.z});
    const AugmentedState k4 = rhs(d, end, {y.Z + h * k3.Z, y.z + h * k3.z});
    AugmentedState next{y.Z + (h / 6.0) * (k1.Z + 2.0 * k2.Z + 2.0 * k3.Z + k4.Z),
                        y.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
    if (opt_.reorthonormalize) next.Z = reorthonormalize(next.Z, eps_);
    if (!next.Z.allFinite() || !next.z.allFinite() || next.Z.cwiseAbs().maxCoeff() > opt_.blow_up_limit ||
        next.z.cwiseAbs().maxCoeff() > opt_.blow_up_limit) {
      throw Error(ErrorKind::blow_up, "frame integration blew up near " + describe_point(ue, ve));
    }
    return next;
  }

 private:
  const ScalarField& mu_;
  const ScalarField& nu_;
  Sign eps_;
  IntegrationOptions opt_;
};

struct Sweep {
  Grid<AugmentedState> states;
  Grid<double> sqrt_E;
};

// Integrates along `first` from the origin, then along the other direction
// from every baseline node.
inline Sweep sweep(const Stepper& st, const GridSpec& g, const FrameMatrix& Z0, Direction first) {
  Sweep out{Grid<AugmentedState>(g.nu, g.nv), Grid<double>(g.nu, g.nv)};
  const Direction second = first == Direction::u ? Direction::v : Direction::u;
  const std::size_t n_first = first == Direction::u ? g.nu : g.nv;
  const std::size_t n_second = first == Direction::u ? g.nv : g.nu;
  auto node = [&](std::size_t a, std::size_t b) -> std::pair<std::size_t, std::size_t> {
    return first == Direction::u ? std::pair{a, b} : std::pair{b, a};
  };
  auto put = [&](std::size_t a, std::size_t b, const AugmentedState& s, double sqrt_E) {
    const auto [i, j] = node(a, b);
    out.states.at(i, j) = s;
    out.sqrt_E.at(i, j) = sqrt_E;
  };

  AugmentedState y{Z0, Eigen::RowVector4d::Zero()};
  Stepper::Slope s_first = st.slope(first, g.u0, g.v0);
  put(0, 0, y, s_first.sqrt_E);
  for (std::size_t a = 0;; ++a) {
    const auto [i, j] = node(a, 0);
    const double u = g.u(i), v = g.v(j);
    // Column in the second direction from this baseline node.
    Stepper::Slope s_second = st.slope(second, u, v);
    AugmentedState c = y;
    for (std::size_t b = 0; b + 1 < n_second; ++b) {
      const auto [ci, cj] = node(a, b);
      Stepper::Slope end;
      c = st.step(second, g.u(ci), g.v(cj), g.h, c, s_second, end);
      s_second = end;
      put(a, b + 1, c, end.sqrt_E);
    }
    if (a + 1 >= n_first) break;
    Stepper::Slope end;
    y = st.step(first, u, v, g.h, y, s_first, end);
    s_first = end;
    put(a + 1, 0, y, end.sqrt_E);
  }
  return out;
}

inline void require_grid_inside(const ScalarField& mu, const ScalarField& nu, const GridSpec& g) {
  const double reach = 2.0 * std::max(mu.fd_step(), nu.fd_step());
  const Rect d = mu.domain().intersect(nu.domain());
  if (!d.contains(g.u0 - reach, g.v0 - reach) || !d.contains(g.u_last() + reach, g.v_last() + reach)) {
    throw Error(ErrorKind::out_of_domain, "synthesis grid with its stencil margin leaves the field domains");
  }
}

}  // namespace detail

/// Frames on the lattice `g`: baseline along u at v0, then v-columns. The
/// transposed sweep (v first) only feeds consistency_defect.
inline SynthesizedSurface integrate_frames(const ScalarField& mu, const ScalarField& nu, Sign epsilon,
                                           const FrameState& initial, const GridSpec& g,
                                           const IntegrationOptions& opt = {}) {
  g.validate();
  const OrthonormalityDefect d0 = frame_defect(initial.x, initial.y, initial.n1, initial.n2, epsilon);
  if (d0.max_abs() > 1e-10) {
    throw Error(ErrorKind::precondition,
                "initial frame is not orthonormal (defect " + std::to_string(d0.max_abs()) + ")");
  }
  detail::require_grid_inside(mu, nu, g);

  const detail::Stepper st(mu, nu, epsilon, opt);
  const detail::FrameMatrix Z0 = detail::to_matrix(initial);
  const detail::Sweep main = detail::sweep(st, g, Z0, detail::Direction::u);

  SynthesizedSurface s;
  s.grid = g;
  s.epsilon = epsilon;
  s.frames = Grid<FrameState>(g.nu, g.nv);
  s.displacements = Grid<NeutralVector>(g.nu, g.nv);
  s.metric_factor = main.sqrt_E;
  for (std::size_t i = 0; i < g.nu; ++i) {
    for (std::size_t j = 0; j < g.nv; ++j) {
      const auto& a = main.states.at(i, j);
      FrameState f = detail::to_state(a.Z, {g.u(i), g.v(j)});
      s.orthonormality_drift =
          std::max(s.orthonormality_drift, frame_defect(f.x, f.y, f.n1, f.n2, epsilon).max_abs());
      s.frames.at(i, j) = f;
      s.displacements.at(i, j) = detail::to_vector(a.z);
    }
  }

  if (opt.skip_transposed_sweep) {
    s.consistency_defect = std::nan("");
  } else {
    const detail::Sweep other = detail::sweep(st, g, Z0, detail::Direction::v);
    for (std::size_t i = 0; i < g.nu; ++i)
      for (std::size_t j = 0; j < g.nv; ++j) {
        const auto& a = main.states.at(i, j);
        const auto& b = other.states.at(i, j);
        s.consistency_defect = std::max(
            {s.consistency_defect, (a.Z - b.Z).cwiseAbs().maxCoeff(), (a.z - b.z).cwiseAbs().maxCoeff()});
      }
  }

  // The columns solve Z_v = B Z; compatibility shows up as Z_u != A Z away
  // from the baseline. Checked by central differences on the stored frames.
  for (std::size_t i = 1; i + 1 < g.nu; ++i) {
    for (std::size_t j = 0; j < g.nv; ++j) {
      const Eigen::Matrix4d Zu =
          (main.states.at(i + 1, j).Z - main.states.at(i - 1, j).Z) / (2.0 * g.h);
      const Eigen::Matrix4d A = build_matrices(mu, nu, epsilon, g.u(i), g.v(j)).A;
      s.integrability_defect =
          std::max(s.integrability_defect, (Zu - A * main.states.at(i, j).Z).cwiseAbs().maxCoeff());
    }
  }
  return s;
}

/// Fills positions = initial_point + integrated displacement and folds the
/// mixed-partial check (sqrt(E) x)_v = (sqrt(-G) y)_u on the stored grid into
/// integrability_defect.
inline SynthesizedSurface integrate_positions(SynthesizedSurface s, const NeutralVector& initial_point) {
  const GridSpec& g = s.grid;
  if (s.frames.nu() != g.nu || s.frames.nv() != g.nv || s.displacements.nu() != g.nu) {
    throw Error(ErrorKind::precondition, "frames must be integrated before positions");
  }
  s.positions = Grid<NeutralVector>(g.nu, g.nv);
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) s.positions.at(i, j) = initial_point + s.displacements.at(i, j);

  for (std::size_t i = 1; i + 1 < g.nu; ++i) {
    for (std::size_t j = 1; j + 1 < g.nv; ++j) {
      auto tu = [&](std::size_t a, std::size_t b) { return s.metric_factor.at(a, b) * s.frames.at(a, b).x; };
      auto tv = [&](std::size_t a, std::size_t b) { return s.metric_factor.at(a, b) * s.frames.at(a, b).y; };
      const NeutralVector d = (tu(i, j + 1) - tu(i, j - 1)) / (2.0 * g.h) - (tv(i + 1, j) - tv(i - 1, j)) / (2.0 * g.h);
      s.integrability_defect = std::max(s.integrability_defect, max_abs(d));
    }
  }
  return s;
}

namespace detail {

// Fourth-order central stencils on the stored positions.
inline NeutralVector d1(const Grid<NeutralVector>& p, std::size_t i, std::size_t j, int di, int dj, double h) {
  auto at = [&](int k) {
    return p.at(static_cast<std::size_t>(static_cast<long>(i) + k * di),
                static_cast<std::size_t>(static_cast<long>(j) + k * dj));
  };
  return (-1.0 * at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
}

inline NeutralVector d2(const Grid<NeutralVector>& p, std::size_t i, std::size_t j, int di, int dj, double h) {
  auto at = [&](int k) {
    return p.at(static_cast<std::size_t>(static_cast<long>(i) + k * di),
                static_cast<std::size_t>(static_cast<long>(j) + k * dj));
  };
  return (-1.0 * at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
}

inline NeutralVector d11(const Grid<NeutralVector>& p, std::size_t i, std::size_t j, double h) {
  static constexpr std::array<double, 5> w{1.0, -8.0, 0.0, 8.0, -1.0};
  NeutralVector acc;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      const double c = w[static_cast<std::size_t>(a + 2)] * w[static_cast<std::size_t>(b + 2)];
      if (c != 0.0)
        acc += c * p.at(static_cast<std::size_t>(static_cast<long>(i) + a),
                        static_cast<std::size_t>(static_cast<long>(j) + b));
    }
  return acc / (144.0 * h * h);
}

}  // namespace detail

/// Jet at lattice node (i, j) by fourth-order stencils; needs two nodes of
/// margin on every side.
inline Jet2 grid_jet(const SynthesizedSurface& s, std::size_t i, std::size_t j) {
  const GridSpec& g = s.grid;
  if (!s.has_positions()) throw Error(ErrorKind::precondition, "surface has no positions");
  if (i < 2 || j < 2 || i + 2 >= g.nu || j + 2 >= g.nv) {
    throw Error(ErrorKind::out_of_domain, "grid jet needs two nodes of margin");
  }
  const auto& p = s.positions;
  Jet2 jet;
  jet.z = p.at(i, j);
  jet.z_u = detail::d1(p, i, j, 1, 0, g.h);
  jet.z_v = detail::d1(p, i, j, 0, 1, g.h);
  jet.z_uu = detail::d2(p, i, j, 1, 0, g.h);
  jet.z_vv = detail::d2(p, i, j, 0, 1, g.h);
  jet.z_uv = detail::d11(p, i, j, g.h);
  return jet;
}

/// The stored positions as a chart. Queries snap to the nearest lattice node.
inline SurfaceChart grid_chart(const SynthesizedSurface& s) {
  if (!s.has_positions()) throw Error(ErrorKind::precondition, "surface has no positions");
  const GridSpec g = s.grid;
  if (g.nu < 5 || g.nv < 5) throw Error(ErrorKind::precondition, "grid chart needs at least 5x5 nodes");
  auto shared = std::make_shared<const SynthesizedSurface>(s);
  auto index = [g](double u, double v) {
    const auto i = static_cast<std::size_t>(std::lround((u - g.u0) / g.h));
    const auto j = static_cast<std::size_t>(std::lround((v - g.v0) / g.h));
    return std::pair{std::min(i, g.nu - 1), std::min(j, g.nv - 1)};
  };
  const Rect domain{g.u0, g.u_last(), g.v0, g.v_last()};
  return SurfaceChart::analytic(
      [shared, index](double u, double v) {
        const auto [i, j] = index(u, v);
        return shared->positions.at(i, j);
      },
      [shared, index](double u, double v) {
        const auto [i, j] = index(u, v);
        return grid_jet(*shared, i, j);
      },
      domain, "synthesized grid");
}

struct SynthesisValidation {
  double mu_error = 0.0;
  double nu_error = 0.0;
  double minimality_residual = 0.0;
  double canonical_defect = 0.0;  // max | |mu^2 - nu^2| f^4 - 1 |
  double curvature_error = 0.0;   // K, kappa against -eps(mu^2+nu^2), -2|mu nu|
  bool epsilon_consistent = true;
  double invariant_mismatch = 0.0;  // max of mu, nu and curvature errors
  std::size_t points = 0;
  bool passed = false;
  bool flagged = false;
};

inline constexpr double kValidationGate = 1e-3;

/// Re-analyzes the synthesized grid (two-node margin excluded) and compares
/// against the generating fields. `stride` thins the evaluation lattice.
inline SynthesisValidation validate_synthesis(const SynthesizedSurface& s, const ScalarField& mu,
                                              const ScalarField& nu, Sign epsilon, double tol = 1e-4,
                                              std::size_t stride = 1) {
  if (!s.has_positions()) throw Error(ErrorKind::precondition, "surface has no positions");
  if (!(s.integrability_defect <= kValidationGate)) {
    throw Error(ErrorKind::precondition, "integrability defect " + std::to_string(s.integrability_defect) +
                                             " exceeds the validation gate");
  }
  const GridSpec& g = s.grid;
  if (g.nu < 5 || g.nv < 5) throw Error(ErrorKind::precondition, "validation needs at least 5x5 nodes");
  stride = std::max<std::size_t>(stride, 1);
  SynthesisValidation r;
  const double eps = epsilon.real();
  for (std::size_t i = 2; i + 2 < g.nu; i += stride) {
    for (std::size_t j = 2; j + 2 < g.nv; j += stride) {
      const double u = g.u(i), v = g.v(j);
      const FundamentalData fd = second_form(grid_jet(s, i, j), u, v);
      const GeometricInvariants inv = extract_frame(fd);
      const double m = std::abs(mu.eval(u, v)), n = std::abs(nu.eval(u, v));
      r.mu_error = std::max(r.mu_error, std::abs(inv.mu - m));
      r.nu_error = std::max(r.nu_error, std::abs(inv.nu - n));
      r.minimality_residual = std::max(r.minimality_residual, euclid_norm(0.5 * (fd.sigma_xx - fd.sigma_yy)));
      const double f2 = fd.f * fd.f;
      r.canonical_defect =
          std::max(r.canonical_defect, std::abs(std::abs((inv.mu - inv.nu) * (inv.mu + inv.nu)) * f2 * f2 - 1.0));
      const double K_expected = -eps * (m * m + n * n), kappa_expected = -2.0 * m * n;
      r.curvature_error =
          std::max({r.curvature_error, std::abs(inv.K - K_expected), std::abs(inv.kappa - kappa_expected)});
      if (inv.epsilon != epsilon) r.epsilon_consistent = false;
      ++r.points;
    }
  }
  r.invariant_mismatch = std::max({r.mu_error, r.nu_error, r.curvature_error});
  r.passed = r.epsilon_consistent && r.invariant_mismatch <= tol && r.minimality_residual <= tol &&
             r.canonical_defect <= tol;
  r.flagged = !r.passed;
  return r;
}

}  // namespace minlor
