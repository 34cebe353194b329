#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "minlor/error.hpp"
#include "minlor/expression.hpp"

namespace minlor {

/// Closed rectangle [u_min, u_max] x [v_min, v_max].
struct Rect {
  double u_min = 0.0;
  double u_max = 1.0;
  double v_min = 0.0;
  double v_max = 1.0;

  double extent_u() const { return u_max - u_min; }
  double extent_v() const { return v_max - v_min; }
  double min_extent() const { return std::min(extent_u(), extent_v()); }

  // The slack absorbs rounding in stencil coordinates like (u_max - h) + h.
  bool contains(double u, double v) const {
    const double su = 1e-12 * std::max(1.0, std::abs(u_min) + std::abs(u_max));
    const double sv = 1e-12 * std::max(1.0, std::abs(v_min) + std::abs(v_max));
    return u >= u_min - su && u <= u_max + su && v >= v_min - sv && v <= v_max + sv;
  }

  Rect intersect(const Rect& o) const {
    return Rect{std::max(u_min, o.u_min), std::min(u_max, o.u_max), std::max(v_min, o.v_min),
                std::min(v_max, o.v_max)};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline std::string describe_point(double u, double v) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << u << ", " << v << ')';
  return os.str();
}

/// A real function of (u, v) on a rectangle, with a fixed finite-difference step.
/// Immutable; copies share the underlying evaluator.
class ScalarField {
 public:
  using Callback = std::function<double(double, double)>;

  static constexpr double kDefaultStepFraction = 1e-4;

  static ScalarField from_callback(Callback fn, Rect domain, std::optional<double> fd_step = std::nullopt,
                                   std::string description = "<callback>") {
    return ScalarField(std::move(fn), std::nullopt, domain, fd_step, std::move(description));
  }

  static ScalarField from_expression(const expr::Expression& e, Rect domain,
                                     std::optional<double> fd_step = std::nullopt) {
    if (!e.is_closed()) throw Error(ErrorKind::precondition, "expression has unbound parameters");
    auto shared = std::make_shared<const expr::Expression>(e);
    Callback fn = [shared](double u, double v) { return (*shared)(u, v); };
    return ScalarField(std::move(fn), e, domain, fd_step, e.to_string());
  }

  static ScalarField parse(std::string_view text, Rect domain, std::optional<double> fd_step = std::nullopt,
                           const std::map<std::string, double>& params = {}) {
    return from_expression(expr::parse_bound(text, params), domain, fd_step);
  }

  static ScalarField constant(double value, Rect domain, std::optional<double> fd_step = std::nullopt) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    return from_callback([value](double, double) { return value; }, domain, fd_step, os.str());
  }

  /// Value at (u, v); throws out_of_domain or non_finite.
  double eval(double u, double v) const {
    if (!domain_.contains(u, v)) {
      throw Error(ErrorKind::out_of_domain, "point " + describe_point(u, v) + " outside field domain");
    }
    const double r = fn_(u, v);
    if (!std::isfinite(r)) {
      throw Error(ErrorKind::non_finite, "field " + description_ + " non-finite at " + describe_point(u, v));
    }
    return r;
  }

  double operator()(double u, double v) const { return eval(u, v); }

  const Rect& domain() const { return domain_; }
  double fd_step() const { return fd_step_; }
  const std::string& description() const { return description_; }
  const std::optional<expr::Expression>& expression() const { return expression_; }

  ScalarField with_fd_step(double step) const {
    return ScalarField(fn_, expression_, domain_, step, description_);
  }

  ScalarField with_domain(Rect domain) const {
    return ScalarField(fn_, expression_, domain, fd_step_, description_);
  }

 private:
  ScalarField(Callback fn, std::optional<expr::Expression> e, Rect domain, std::optional<double> fd_step,
              std::string description)
      : fn_(std::move(fn)), expression_(std::move(e)), domain_(domain), description_(std::move(description)) {
    if (!(domain_.extent_u() > 0.0) || !(domain_.extent_v() > 0.0)) {
      throw Error(ErrorKind::precondition, "field domain must have positive area");
    }
    fd_step_ = fd_step.value_or(kDefaultStepFraction * domain_.min_extent());
    if (!(fd_step_ > 0.0) || !(fd_step_ < domain_.min_extent() / 4.0)) {
      throw Error(ErrorKind::precondition, "fd_step must lie in (0, min extent / 4)");
    }
  }

  Callback fn_;
  std::optional<expr::Expression> expression_;
  Rect domain_;
  double fd_step_ = 0.0;
  std::string description_;
};

/// Builds a field from a pointwise combination of other fields. The domain
/// is the intersection; the step is taken from the first field.
template <typename Fn, typename... Fields>
ScalarField combine(std::string description, Fn fn, const ScalarField& first, const Fields&... rest) {
  Rect domain = first.domain();
  ((domain = domain.intersect(rest.domain())), ...);
  return ScalarField::from_callback(
      [fn, first, rest...](double u, double v) { return fn(first.eval(u, v), rest.eval(u, v)...); }, domain,
      first.fd_step(), std::move(description));
}

namespace detail {

inline void require_stencil(const ScalarField& f, double u, double v, double reach) {
  const Rect& d = f.domain();
  if (!d.contains(u - reach, v - reach) || !d.contains(u + reach, v + reach)) {
    throw Error(ErrorKind::out_of_domain,
                "finite-difference stencil at " + describe_point(u, v) + " leaves the field domain");
  }
}

}  // namespace detail

// Central differences, step = f.fd_step(). All are O(h^2).

inline double d_u(const ScalarField& f, double u, double v) {
  const double h = f.fd_step();
  detail::require_stencil(f, u, v, h);
  return (f.eval(u + h, v) - f.eval(u - h, v)) / (2.0 * h);
}

inline double d_v(const ScalarField& f, double u, double v) {
  const double h = f.fd_step();
  detail::require_stencil(f, u, v, h);
  return (f.eval(u, v + h) - f.eval(u, v - h)) / (2.0 * h);
}

/// Hyperbolic Laplacian f_uu - f_vv by the five-point central stencil.
inline double hyperbolic_laplacian(const ScalarField& f, double u, double v) {
  const double h = f.fd_step();
  detail::require_stencil(f, u, v, h);
  // The two -2 f(u,v) centre terms cancel exactly.
  (void)f.eval(u, v);
  return ((f.eval(u + h, v) + f.eval(u - h, v)) - (f.eval(u, v + h) + f.eval(u, v - h))) / (h * h);
}

}  // namespace minlor
