#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "charts.hpp"
#include "minlor/gallery.hpp"
#include "minlor/surface.hpp"
#include "support.hpp"

using namespace minlor;
using minlor::testing::Gen;
using minlor::testing::kRandomCases;

namespace {

const double kPi = std::numbers::pi;
const Rect kBox{-1, 1, -1, 1};

SurfaceChart plane() { return SurfaceChart::from_expressions({"u", "v", "0", "0"}, kBox); }
SurfaceChart lorentz_plane() { return SurfaceChart::from_expressions({"u", "0", "v", "0"}, kBox); }

void expect_vec_near(const NeutralVector& a, const NeutralVector& b, double tol) {
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], tol) << "component " << k;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::precondition;
}

/// Fundamental data carrying only the coefficients and the matching sigma vectors.
FundamentalData coefficients(double a, double b, double c, double d) {
  FundamentalData fd;
  fd.x = {1, 0, 0, 0};
  fd.y = {0, 0, 1, 0};
  fd.e1 = {0, 1, 0, 0};
  fd.e2 = {0, 0, 0, 1};
  fd.a = a;
  fd.b = b;
  fd.c = c;
  fd.d = d;
  fd.a_yy = a;
  fd.b_yy = b;
  fd.sigma_xx = a * fd.e1 + b * fd.e2;
  fd.sigma_xy = c * fd.e1 + d * fd.e2;
  fd.sigma_yy = fd.sigma_xx;
  return fd;
}

}  // namespace

TEST(Jet, Plane) {
  const Jet2 j = jet(plane(), 0.2, -0.3);
  expect_vec_near(j.z_u, {1, 0, 0, 0}, 1e-10);
  expect_vec_near(j.z_v, {0, 1, 0, 0}, 1e-10);
  expect_vec_near(j.z_uu, {}, 1e-6);
  expect_vec_near(j.z_uv, {}, 1e-6);
  expect_vec_near(j.z_vv, {}, 1e-6);
}

TEST(Jet, ReferenceChartTangentsAtCentre) {
  for (const SurfaceChart& chart :
       {gallery::chart_ts(),
        SurfaceChart::finite_difference(gallery::surface_closed_form, gallery::chart_ts().domain())}) {
    const Jet2 j = jet(chart, kPi / 2, 0);
    expect_vec_near(j.z_u, {-1, 0, 0, 0}, 1e-8);
    expect_vec_near(j.z_v, {0, 0, 0, 1}, 1e-8);
  }
}

TEST(Jet, ReferenceChartWaveIdentity) {
  Gen g(21);
  const SurfaceChart chart = gallery::chart_ts();
  const SurfaceChart fd = SurfaceChart::finite_difference(gallery::surface_closed_form, chart.domain(), 1e-4);
  for (int k = 0; k < 20; ++k) {
    const UV p = minlor::testing::random_point(g, chart.domain());
    const Jet2 a = jet(chart, p.u, p.v);
    expect_vec_near(a.z_uu - a.z_vv, {}, 1e-14);
    const Jet2 b = jet(fd, p.u, p.v);
    expect_vec_near(b.z_uu - b.z_vv, {}, 1e-6);
  }
}

TEST(Jet, MixedStencilIsSymmetric) {
  const auto chart = SurfaceChart::from_expressions({"u^2*v", "sin(u*v)", "v^3", "u"}, kBox, 1e-3);
  const Jet2 j = jet(chart, 0.3, 0.4);
  expect_vec_near(j.z_uv, {2 * 0.3, std::cos(0.12) - 0.12 * std::sin(0.12), 0, 0}, 1e-6);
}

TEST(Jet, DegenerateTangent) {
  const auto chart = SurfaceChart::from_expressions({"u", "0", "0", "0"}, kBox);
  EXPECT_EQ(kind_of([&] { jet(chart, 0, 0); }), ErrorKind::degenerate_tangent);
}

TEST(Jet, StencilOutsideDomain) {
  EXPECT_EQ(kind_of([&] { jet(plane(), 1.0, 0.0); }), ErrorKind::out_of_domain);
}

TEST(FirstForm, EuclideanPlaneIsNotLorentzian) {
  EXPECT_EQ(kind_of([&] { first_form(jet(plane(), 0, 0)); }), ErrorKind::non_lorentzian);
}

TEST(FirstForm, LorentzPlane) {
  const FirstForm ff = first_form(jet(lorentz_plane(), 0.1, 0.2));
  EXPECT_NEAR(ff.E, 1, 1e-10);
  EXPECT_NEAR(ff.F, 0, 1e-10);
  EXPECT_NEAR(ff.G, -1, 1e-10);
}

TEST(FirstForm, ReferenceChartAtCentre) {
  const FirstForm ff = first_form(jet(gallery::chart_ts(), kPi / 2, 0));
  EXPECT_NEAR(ff.E, 1, 1e-14);
  EXPECT_NEAR(ff.F, 0, 1e-14);
  EXPECT_NEAR(ff.G, -1, 1e-14);
}

TEST(FirstForm, ReferenceChartMetricFactor) {
  // E = cos^2 2t - cos^2 t = sin^2 t (1 - 4 cos^2 t)
  Gen g(22);
  for (int k = 0; k < 20; ++k) {
    const UV p = minlor::testing::random_point(g, gallery::chart_ts().domain());
    const FirstForm ff = first_form(jet(gallery::chart_ts(), p.u, p.v));
    const double s = std::sin(p.u), c = std::cos(p.u);
    EXPECT_NEAR(ff.E, s * s * (1 - 4 * c * c), 1e-13);
    EXPECT_NEAR(ff.E + ff.G, 0, 1e-13);
  }
}

TEST(SecondForm, LorentzPlaneIsTotallyGeodesic) {
  const FundamentalData fd = second_form(lorentz_plane(), 0.3, -0.2);
  for (double x : {fd.a, fd.b, fd.c, fd.d, fd.gamma1, fd.gamma2, fd.beta1, fd.beta2}) EXPECT_NEAR(x, 0, 1e-6);
  EXPECT_NEAR(norm2(fd.e1), 1, 1e-12);
  EXPECT_NEAR(norm2(fd.e2), -1, 1e-12);
}

TEST(SecondForm, ReferenceChartIsMinimalAtCentre) {
  const FundamentalData fd = second_form(gallery::chart_uv(), gallery::u0(), 0);
  EXPECT_LT(euclid_norm(0.5 * (fd.sigma_xx - fd.sigma_yy)), 1e-6);
}

TEST(SecondForm, CanonicalMetricAtCentre) {
  const FundamentalData fd = second_form(gallery::chart_uv(), gallery::u0(), 0);
  EXPECT_NEAR(fd.E, 1 / std::sqrt(3.0), 1e-9);
}

TEST(SecondForm, RejectsNonIsothermal) {
  const auto chart = SurfaceChart::from_expressions({"2*u", "0", "v", "0"}, kBox);
  EXPECT_EQ(kind_of([&] { second_form(chart, 0, 0); }), ErrorKind::not_isothermal);
}

TEST(SecondForm, FrameOrientationAndSignature) {
  const FundamentalData fd = second_form(gallery::chart_uv(), gallery::u0() + 0.1, 0.3);
  EXPECT_GT(det4(fd.x, fd.y, fd.e1, fd.e2), 0);
  const auto d = frame_defect(fd.x, fd.y, fd.e1, fd.e2, Sign::plus());
  EXPECT_LT(d.max_abs(), 1e-12);
}

TEST(SecondForm, CoefficientsReproduceNormalParts) {
  const FundamentalData fd = second_form(gallery::chart_uv(), gallery::u0() - 0.2, 0.5);
  expect_vec_near(fd.sigma_xx, fd.a * fd.e1 + fd.b * fd.e2, 1e-12);
  expect_vec_near(fd.sigma_xy, fd.c * fd.e1 + fd.d * fd.e2, 1e-12);
  // sigma(x,x) is the normal part of z_uu / E.
  const Jet2 j = jet(gallery::chart_uv(), fd.u, fd.v);
  const NeutralVector w = j.z_uu / fd.E;
  const NeutralVector normal = w - inner(w, fd.x) * fd.x + inner(w, fd.y) * fd.y;
  expect_vec_near(fd.sigma_xx, normal, 1e-12);
}

TEST(SecondForm, TangentConnectionFromMetric) {
  // gamma2 = -f_u / f^2 on the reference chart in (t, s), where f = sin t sqrt(1 - 4 cos^2 t).
  const double t = 1.3;
  const FundamentalData fd = second_form(gallery::chart_ts(), t, 0.2);
  auto f = [](double x) { return std::sin(x) * std::sqrt(1 - 4 * std::cos(x) * std::cos(x)); };
  const double h = 1e-5;
  const double fu = (f(t + h) - f(t - h)) / (2 * h);
  EXPECT_NEAR(fd.gamma2, -fu / (f(t) * f(t)), 1e-8);
  EXPECT_NEAR(fd.gamma1, 0, 1e-12);
}

TEST(SecondForm, FlipNormalNegatesCoefficients) {
  const FundamentalData fd = second_form(gallery::chart_uv(), gallery::u0() + 0.05, 0.1);
  const FundamentalData g = flip_normal(fd, 2);
  EXPECT_EQ(g.b, -fd.b);
  EXPECT_EQ(g.d, -fd.d);
  EXPECT_EQ(g.a, fd.a);
  expect_vec_near(g.e2, -fd.e2, 0);
}

TEST(CurvatureReport, ZeroFormIsDegenerate) {
  const CurvatureReport r = curvature_report(coefficients(0, 0, 0, 0), 1e-7);
  EXPECT_EQ(r.K, 0);
  EXPECT_EQ(r.kappa, 0);
  EXPECT_EQ(r.surface_class, SurfaceClass::degenerate_point);
  EXPECT_EQ(r.first_normal_dim, 0);
}

TEST(CurvatureReport, GeneralTypeFromReferenceInvariants) {
  // b^2 + c^2 = 5 and 2bc = -4 give K = 5, kappa = -4.
  const CurvatureReport r = curvature_report(coefficients(0, 1, -2, 0), 1e-7);
  EXPECT_DOUBLE_EQ(r.K, 5);
  EXPECT_DOUBLE_EQ(r.kappa, -4);
  EXPECT_DOUBLE_EQ(r.discriminant, 9);
  EXPECT_EQ(r.surface_class, SurfaceClass::general_type);
  EXPECT_EQ(r.first_normal_dim, 2);
}

TEST(CurvatureReport, ThirdClass) {
  const double b = (std::sqrt(8.0) + std::sqrt(2.0)) / 2, c = (std::sqrt(8.0) - std::sqrt(2.0)) / 2;
  const CurvatureReport r = curvature_report(coefficients(1, b, c, -1), 1e-7);
  EXPECT_NEAR(r.K, 3, 1e-12);
  EXPECT_NEAR(r.kappa, 5, 1e-12);
  EXPECT_NEAR(r.discriminant, -16, 1e-10);
  EXPECT_EQ(r.surface_class, SurfaceClass::third_class);
}

TEST(CurvatureReport, SuperConformal) {
  // a = d = 0, b = c: K = 2b^2, kappa = 2b^2
  const CurvatureReport r = curvature_report(coefficients(0, 1, 1, 0), 1e-7);
  EXPECT_EQ(r.surface_class, SurfaceClass::super_conformal);
  EXPECT_EQ(r.first_normal_dim, 2);
}

TEST(CurvatureReport, OneDimensionalFirstNormalSpace) {
  const CurvatureReport r = curvature_report(coefficients(1, 0, 2, 0), 1e-7);
  EXPECT_EQ(r.first_normal_dim, 1);
  EXPECT_EQ(r.kappa, 0);
}

TEST(MinimalityResidual, LorentzPlane) {
  const auto pts = uniform_samples(kBox, 5, 5, 0.1);
  EXPECT_NEAR(minimality_residual(lorentz_plane(), pts), 0, 1e-9);
}

TEST(MinimalityResidual, ReferenceChartInterior) {
  const SurfaceChart chart = gallery::chart_ts();
  const auto pts = uniform_samples(chart.domain(), 21, 21, 0.05);
  EXPECT_LE(minimality_residual(chart, pts), 1e-5);
}

TEST(MinimalityResidual, NonMinimalChart) {
  // (u, v^2, v, 0) is isothermal along v = 0 and bends there.
  const auto chart = SurfaceChart::from_expressions({"u", "v^2", "v", "0"}, kBox, 1e-4);
  const std::vector<UV> pts{{-0.5, 0}, {0, 0}, {0.5, 0}};
  EXPECT_GT(minimality_residual(chart, pts), 1e-2);
  EXPECT_NEAR(minimality_residual(chart, pts), 1.0, 1e-6);
}

TEST(Hyperplane, PlanarData) {
  const auto pts = uniform_samples(kBox, 4, 4);
  const HyperplaneFit fit = hyperplane_containment(plane(), pts, 1e-9);
  EXPECT_TRUE(fit.contained);
  EXPECT_NEAR(fit.residual, 0, 1e-12);
  ASSERT_TRUE(fit.normal.has_value());
  EXPECT_NEAR((*fit.normal)[0], 0, 1e-12);
  EXPECT_NEAR((*fit.normal)[1], 0, 1e-12);
}

TEST(Hyperplane, ReferenceSurfaceIsNotContained) {
  const SurfaceChart chart = gallery::chart_ts();
  const auto pts = uniform_samples(chart.domain(), 6, 6, 0.05);
  const HyperplaneFit fit = hyperplane_containment(chart, pts, 1e-6);
  EXPECT_FALSE(fit.contained);
  EXPECT_GT(fit.residual, 1e-2);
  EXPECT_FALSE(fit.normal.has_value());
}

TEST(Hyperplane, TiltedLorentzPlane) {
  const auto chart = SurfaceChart::from_expressions({"u", "v", "u+v", "0"}, kBox);
  const auto pts = uniform_samples(kBox, 4, 4);
  const HyperplaneFit fit = hyperplane_containment(chart, pts, 1e-9);
  ASSERT_TRUE(fit.contained);
  const NeutralVector N = *fit.normal;
  // N is neutral-orthogonal to both tangent directions.
  EXPECT_NEAR(inner(N, {1, 0, 1, 0}), 0, 1e-12);
  EXPECT_NEAR(inner(N, {0, 1, 1, 0}), 0, 1e-12);
  const bool lightlike = causal_character(N) == CausalCharacter::lightlike;
  EXPECT_EQ(*fit.character, lightlike ? HyperplaneCharacter::degenerate : HyperplaneCharacter::non_degenerate);
}

TEST(Hyperplane, DegenerateHyperplane) {
  // Points of the null hyperplane x1 = x3 with u, v spanning it.
  const auto chart = SurfaceChart::from_expressions({"u", "v", "u", "v*v"}, kBox);
  const auto pts = uniform_samples(kBox, 4, 4);
  const HyperplaneFit fit = hyperplane_containment(chart, pts, 1e-9);
  ASSERT_TRUE(fit.contained);
  EXPECT_EQ(*fit.character, HyperplaneCharacter::degenerate);
}

TEST(Hyperplane, InsufficientSamples) {
  const std::vector<UV> pts{{0, 0}, {0.1, 0}, {0, 0.1}, {0.1, 0.1}};
  EXPECT_EQ(kind_of([&] { hyperplane_containment(plane(), pts, 1e-9); }), ErrorKind::insufficient_samples);
}

TEST(Classification, ToString) {
  EXPECT_EQ(to_string(SurfaceClass::general_type), "general_type");
  EXPECT_EQ(to_string(SurfaceClass::degenerate_point), "degenerate_point");
}

TEST(SurfaceProperty, TangentFrameIsOrthonormal) {
  Gen g(23);
  for (int k = 0; k < kRandomCases; ++k) {
    const SurfaceChart chart = minlor::testing::random_minimal_chart(g);
    const UV p = minlor::testing::random_point(g, chart.domain());
    const FundamentalData fd = second_form(chart, p.u, p.v);
    EXPECT_NEAR(norm2(fd.x), 1, 1e-9);
    EXPECT_NEAR(norm2(fd.y), -1, 1e-9);
    EXPECT_NEAR(inner(fd.x, fd.y), 0, 1e-9);
  }
}

TEST(SurfaceProperty, GaussCurvatureMatchesFrameFreeFormula) {
  Gen g(24);
  for (int k = 0; k < kRandomCases; ++k) {
    const SurfaceChart chart = minlor::testing::random_minimal_chart(g);
    const UV p = minlor::testing::random_point(g, chart.domain());
    const FundamentalData fd = second_form(chart, p.u, p.v);
    const CurvatureReport r = curvature_report(fd);
    const double den = norm2(fd.x) * norm2(fd.y) - inner(fd.x, fd.y) * inner(fd.x, fd.y);
    const double K = (inner(fd.sigma_xx, fd.sigma_yy) - inner(fd.sigma_xy, fd.sigma_xy)) / den;
    EXPECT_NEAR(r.K, K, 1e-8 * std::max(1.0, std::abs(K)));
  }
}

TEST(SurfaceProperty, DiscriminantIdentityOnCoefficients) {
  Gen g(25);
  for (int k = 0; k < kRandomCases; ++k) {
    const double a = g.uniform(-3, 3), b = g.uniform(-3, 3), c = g.uniform(-3, 3), d = g.uniform(-3, 3);
    const CurvatureReport r = curvature_report(coefficients(a, b, c, d));
    const double rhs = std::pow(a * a - b * b, 2) + std::pow(c * c - d * d, 2) - 2 * std::pow(b * c - a * d, 2) -
                       2 * std::pow(a * c - b * d, 2);
    EXPECT_NEAR(r.discriminant, rhs, 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(SurfaceProperty, DiscriminantIdentityOnCharts) {
  Gen g(26);
  for (int k = 0; k < kRandomCases; ++k) {
    const SurfaceChart chart = minlor::testing::random_minimal_chart(g);
    const UV p = minlor::testing::random_point(g, chart.domain());
    const FundamentalData fd = second_form(chart, p.u, p.v);
    const double a = fd.a, b = fd.b, c = fd.c, d = fd.d;
    const double rhs = std::pow(a * a - b * b, 2) + std::pow(c * c - d * d, 2) - 2 * std::pow(b * c - a * d, 2) -
                       2 * std::pow(a * c - b * d, 2);
    EXPECT_NEAR(curvature_report(fd).discriminant, rhs, 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(SurfaceProperty, RankOneFirstNormalSpaceHasFlatNormalConnection) {
  Gen g(27);
  int rank_one = 0;
  for (int k = 0; k < kRandomCases; ++k) {
    // Null curves inside the hyperplane x4 = 0.
    const double a1 = g.nonzero(0.3, 2), b1 = g.uniform(0, 6.3), a2 = g.nonzero(0.3, 2), b2 = g.uniform(0, 6.3);
    const Interval I{-0.3, 0.3};
    const Curve alpha([=](double p) { return NeutralVector(std::sin(a1 * p + b1) / a1, -std::cos(a1 * p + b1) / a1, p, 0); },
                      I, [=](double p) { return NeutralVector(std::cos(a1 * p + b1), std::sin(a1 * p + b1), 1, 0); },
                      [=](double p) { return NeutralVector(-a1 * std::sin(a1 * p + b1), a1 * std::cos(a1 * p + b1), 0, 0); });
    const Curve beta([=](double p) { return NeutralVector(std::sin(a2 * p + b2) / a2, -std::cos(a2 * p + b2) / a2, -p, 0); },
                     I, [=](double p) { return NeutralVector(std::cos(a2 * p + b2), std::sin(a2 * p + b2), -1, 0); },
                     [=](double p) { return NeutralVector(-a2 * std::sin(a2 * p + b2), a2 * std::cos(a2 * p + b2), 0, 0); });
    const NullCurvePair pair{alpha, beta};
    if (!validate_pair(pair, 21).passed || validate_pair(pair, 21).transversality < 0.05) continue;
    const SurfaceChart chart = surface_from_pair(pair);
    const UV p = minlor::testing::random_point(g, chart.domain());
    const CurvatureReport r = curvature_report(second_form(chart, p.u, p.v));
    if (r.first_normal_dim <= 1) {
      ++rank_one;
      EXPECT_NEAR(r.kappa, 0, 1e-7);
    }
  }
  EXPECT_GT(rank_one, 50);
}
