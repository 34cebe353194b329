#pragma once

// Minimal Lorentz surfaces as sums of two transversal null curves.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minlor/error.hpp"
#include "minlor/expression.hpp"
#include "minlor/neutral.hpp"
#include "minlor/surface.hpp"

namespace minlor {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  double centre() const { return 0.5 * (lo + hi); }
  bool contains(double t) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi));
    return t >= lo - slack && t <= hi + slack;
  }
};

class Curve {
 public:
  using Fn = std::function<NeutralVector(double)>;

  /// Derivatives default to central differences with step 1e-5 of the width.
  Curve(Fn position, Interval domain, std::optional<Fn> d1 = std::nullopt, std::optional<Fn> d2 = std::nullopt,
        std::string description = "<callback>")
      : position_(std::move(position)), d1_(std::move(d1)), d2_(std::move(d2)), domain_(domain),
        description_(std::move(description)) {
    if (!(domain_.width() > 0.0)) throw Error(ErrorKind::precondition, "curve interval must have positive width");
    step_ = 1e-5 * domain_.width();
  }

  /// Component expressions in the variable `p`.
  static Curve from_expressions(const std::array<std::string, 4>& components, Interval domain,
                                const std::map<std::string, double>& params = {}) {
    std::array<expr::Expression, 4> comps;
    std::string desc = "(";
    for (std::size_t k = 0; k < 4; ++k) {
      comps[k] = expr::parse_bound(components[k], params, {"p"});
      desc += comps[k].to_string() + (k < 3 ? ", " : ")");
    }
    Fn fn = [comps](double p) {
      const std::array<double, 1> vars{p};
      return NeutralVector(comps[0].eval(vars), comps[1].eval(vars), comps[2].eval(vars), comps[3].eval(vars));
    };
    return Curve(std::move(fn), domain, std::nullopt, std::nullopt, desc);
  }

  NeutralVector operator()(double p) const {
    check(p);
    return position_(p);
  }

  // Difference stencils may reach slightly past the interval.
  NeutralVector d1(double p) const {
    check(p);
    if (d1_) return (*d1_)(p);
    const double h = step_;
    return (position_(p + h) - position_(p - h)) / (2.0 * h);
  }

  NeutralVector d2(double p) const {
    check(p);
    if (d2_) return (*d2_)(p);
    const double h = 1e2 * step_;
    return (position_(p + h) - 2.0 * position_(p) + position_(p - h)) / (h * h);
  }

  bool analytic() const { return d1_.has_value() && d2_.has_value(); }
  const Interval& domain() const { return domain_; }
  const std::string& description() const { return description_; }

 private:
  void check(double p) const {
    if (!domain_.contains(p)) {
      throw Error(ErrorKind::out_of_domain, "curve parameter " + std::to_string(p) + " outside its interval");
    }
  }
  Fn position_;
  std::optional<Fn> d1_, d2_;
  Interval domain_;
  std::string description_;
  double step_ = 0.0;
};

struct NullCurvePair {
  Curve alpha;
  Curve beta;
};

struct PairReport {
  double alpha_null = 0.0;      // max |<a', a'>|
  double beta_null = 0.0;       // max |<b', b'>|
  double transversality = 0.0;  // min |<a', b'>|
  bool alpha_is_null = false;
  bool beta_is_null = false;
  bool transversal = false;
  bool passed = false;
};

inline constexpr double kDefaultNullTol = 1e-8;

inline std::vector<double> interval_samples(const Interval& I, std::size_t n) {
  std::vector<double> out;
  if (n == 1) return {I.centre()};
  for (std::size_t k = 0; k < n; ++k) out.push_back(I.lo + I.width() * static_cast<double>(k) / static_cast<double>(n - 1));
  return out;
}

/// Tolerances are relative: |<c', c'>| <= tol * max(1, |c'|_E^2) counts as null,
/// and |<a', b'>| > tol * max(1, |a'|_E |b'|_E) as transversal.
inline PairReport validate_pair(const NullCurvePair& pair, std::span<const double> samples_p,
                                std::span<const double> samples_q, double null_tol = kDefaultNullTol,
                                double transversal_tol = kDefaultNullTol) {
  if (samples_p.empty() || samples_q.empty()) throw Error(ErrorKind::empty_grid, "pair validation needs samples");
  PairReport r;
  r.transversality = std::numeric_limits<double>::infinity();
  std::vector<NeutralVector> da, db;
  bool a_ok = true, b_ok = true, t_ok = true;
  for (double p : samples_p) {
    da.push_back(pair.alpha.d1(p));
    const double q = std::abs(norm2(da.back()));
    r.alpha_null = std::max(r.alpha_null, q);
    a_ok = a_ok && q <= null_tol * std::max(1.0, euclid_norm2(da.back()));
  }
  for (double q : samples_q) {
    db.push_back(pair.beta.d1(q));
    const double n = std::abs(norm2(db.back()));
    r.beta_null = std::max(r.beta_null, n);
    b_ok = b_ok && n <= null_tol * std::max(1.0, euclid_norm2(db.back()));
  }
  for (const auto& a : da)
    for (const auto& b : db) {
      const double t = std::abs(inner(a, b));
      r.transversality = std::min(r.transversality, t);
      t_ok = t_ok && t > transversal_tol * std::max(1.0, euclid_norm(a) * euclid_norm(b));
    }
  r.alpha_is_null = a_ok;
  r.beta_is_null = b_ok;
  r.transversal = t_ok;
  r.passed = a_ok && b_ok && t_ok;
  return r;
}

inline PairReport validate_pair(const NullCurvePair& pair, std::size_t samples_per_curve = 21) {
  const auto p = interval_samples(pair.alpha.domain(), samples_per_curve);
  const auto q = interval_samples(pair.beta.domain(), samples_per_curve);
  return validate_pair(pair, p, q);
}

/// z(u, v) = alpha(u + v) + beta(s (u - v)) with s = sign <alpha', beta'> at
/// the interval centres, so that E = -G = 2 |<alpha', beta'>| > 0 and F = 0.
/// The domain is the largest square centred at the image of the interval
/// centres whose (p, q) image stays inside both intervals.
inline SurfaceChart surface_from_pair(const NullCurvePair& pair, std::size_t samples_per_curve = 21) {
  const PairReport rep = validate_pair(pair, samples_per_curve);
  if (!rep.passed) {
    throw Error(ErrorKind::validation_failed,
                std::string("null pair rejected: ") + (!rep.alpha_is_null  ? "alpha is not null"
                                                      : !rep.beta_is_null ? "beta is not null"
                                                                          : "<alpha', beta'> vanishes"));
  }
  const auto shared = std::make_shared<const NullCurvePair>(pair);
  const double pc = pair.alpha.domain().centre(), qc = pair.beta.domain().centre();
  const double s = inner(pair.alpha.d1(pc), pair.beta.d1(qc)) > 0.0 ? 1.0 : -1.0;
  const double uc = 0.5 * (pc + s * qc), vc = 0.5 * (pc - s * qc);
  const double r = 0.5 * std::min(pair.alpha.domain().width(), pair.beta.domain().width());
  const Rect domain{uc - 0.5 * r, uc + 0.5 * r, vc - 0.5 * r, vc + 0.5 * r};

  auto position = [shared, s](double u, double v) { return shared->alpha(u + v) + shared->beta(s * (u - v)); };
  auto jet = [shared, s](double u, double v) {
    const double p = u + v, q = s * (u - v);
    const NeutralVector a1 = shared->alpha.d1(p), b1 = shared->beta.d1(q);
    const NeutralVector a2 = shared->alpha.d2(p), b2 = shared->beta.d2(q);
    Jet2 j;
    j.z = shared->alpha(p) + shared->beta(q);
    j.z_u = a1 + s * b1;
    j.z_v = a1 - s * b1;
    j.z_uu = a2 + b2;
    j.z_vv = a2 + b2;
    j.z_uv = a2 - b2;
    return j;
  };
  return SurfaceChart::analytic(position, jet, domain,
                                "null pair " + pair.alpha.description() + " + " + pair.beta.description());
}

/// z(p, q) = alpha(p) + beta(q) in the null coordinates themselves. Not
/// isothermal, so not accepted by second_form.
inline SurfaceChart null_coordinate_chart(const NullCurvePair& pair) {
  const auto shared = std::make_shared<const NullCurvePair>(pair);
  const Rect domain{pair.alpha.domain().lo, pair.alpha.domain().hi, pair.beta.domain().lo, pair.beta.domain().hi};
  auto position = [shared](double p, double q) { return shared->alpha(p) + shared->beta(q); };
  auto jet = [shared](double p, double q) {
    Jet2 j;
    j.z = shared->alpha(p) + shared->beta(q);
    j.z_u = shared->alpha.d1(p);
    j.z_v = shared->beta.d1(q);
    j.z_uu = shared->alpha.d2(p);
    j.z_vv = shared->beta.d2(q);
    return j;
  };
  return SurfaceChart::analytic(position, jet, domain, "null coordinates");
}

}  // namespace minlor
