#pragma once

// Linear algebra over the neutral-signature space (+,+,-,-).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string_view>

#include "minlor/error.hpp"

namespace minlor {

/// A sign in {+1, -1}. Constructing from anything else throws.
class Sign {
 public:
  constexpr Sign() = default;
  explicit Sign(int value) : value_(value) {
    if (value != 1 && value != -1) {
      throw Error(ErrorKind::precondition, "sign must be +1 or -1, got " + std::to_string(value));
    }
  }

  static constexpr Sign plus() { return Sign(Tag{}, 1); }
  static constexpr Sign minus() { return Sign(Tag{}, -1); }

  constexpr int value() const { return value_; }
  constexpr double real() const { return static_cast<double>(value_); }
  constexpr Sign flipped() const { return Sign(Tag{}, -value_); }

  friend constexpr bool operator==(Sign a, Sign b) { return a.value_ == b.value_; }

 private:
  struct Tag {};
  constexpr Sign(Tag, int value) : value_(value) {}
  int value_ = 1;
};

struct NeutralVector {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  constexpr NeutralVector() = default;
  constexpr NeutralVector(double x1, double x2, double x3, double x4) : c{x1, x2, x3, x4} {}

  constexpr double operator[](std::size_t i) const { return c[i]; }
  constexpr double& operator[](std::size_t i) { return c[i]; }

  constexpr NeutralVector& operator+=(const NeutralVector& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr NeutralVector& operator-=(const NeutralVector& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr NeutralVector& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }

  friend constexpr NeutralVector operator+(NeutralVector a, const NeutralVector& b) { return a += b; }
  friend constexpr NeutralVector operator-(NeutralVector a, const NeutralVector& b) { return a -= b; }
  friend constexpr NeutralVector operator-(NeutralVector a) { return a *= -1.0; }
  friend constexpr NeutralVector operator*(double s, NeutralVector a) { return a *= s; }
  friend constexpr NeutralVector operator*(NeutralVector a, double s) { return a *= s; }
  friend constexpr NeutralVector operator/(NeutralVector a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const NeutralVector&, const NeutralVector&) = default;

  bool is_finite() const {
    return std::all_of(c.begin(), c.end(), [](double x) { return std::isfinite(x); });
  }

  friend std::ostream& operator<<(std::ostream& os, const NeutralVector& v) {
    return os << '(' << v.c[0] << ", " << v.c[1] << ", " << v.c[2] << ", " << v.c[3] << ')';
  }
};

/// <a, b> = a1 b1 + a2 b2 - a3 b3 - a4 b4
constexpr double inner(const NeutralVector& a, const NeutralVector& b) {
  return a.c[0] * b.c[0] + a.c[1] * b.c[1] - a.c[2] * b.c[2] - a.c[3] * b.c[3];
}

constexpr double norm2(const NeutralVector& v) { return inner(v, v); }

inline double euclid_norm2(const NeutralVector& v) {
  return v.c[0] * v.c[0] + v.c[1] * v.c[1] + v.c[2] * v.c[2] + v.c[3] * v.c[3];
}

inline double euclid_norm(const NeutralVector& v) { return std::sqrt(euclid_norm2(v)); }

inline double max_abs(const NeutralVector& v) {
  double m = 0.0;
  for (double x : v.c) m = std::max(m, std::abs(x));
  return m;
}

enum class CausalCharacter { spacelike, timelike, lightlike };

inline std::string_view to_string(CausalCharacter c) {
  switch (c) {
    case CausalCharacter::spacelike: return "spacelike";
    case CausalCharacter::timelike: return "timelike";
    case CausalCharacter::lightlike: return "lightlike";
  }
  return "unknown";
}

inline constexpr double kDefaultCausalTol = 1e-10;

/// The zero vector counts as spacelike. "Numerically zero" means
/// |<v,v>| <= tol * max(1, |v|_E^2).
inline CausalCharacter causal_character(const NeutralVector& v, double tol = kDefaultCausalTol) {
  const double e2 = euclid_norm2(v);
  if (e2 == 0.0) return CausalCharacter::spacelike;
  const double q = norm2(v);
  if (std::abs(q) <= tol * std::max(1.0, e2)) return CausalCharacter::lightlike;
  return q > 0.0 ? CausalCharacter::spacelike : CausalCharacter::timelike;
}

/// The ten orthonormality defects of a frame (x, y, n1, n2) with signature
/// (+1, -1, eps, -eps), in the order
/// <x,x>-1, <y,y>+1, <n1,n1>-eps, <n2,n2>+eps, <x,y>, <x,n1>, <x,n2>, <y,n1>, <y,n2>, <n1,n2>.
struct OrthonormalityDefect {
  std::array<double, 10> phi{};
  Sign epsilon;

  double max_abs() const {
    double m = 0.0;
    for (double p : phi) m = std::max(m, std::abs(p));
    return m;
  }
};

inline OrthonormalityDefect frame_defect(const NeutralVector& x, const NeutralVector& y,
                                         const NeutralVector& n1, const NeutralVector& n2,
                                         Sign epsilon) {
  const double eps = epsilon.real();
  return OrthonormalityDefect{{inner(x, x) - 1.0, inner(y, y) + 1.0, inner(n1, n1) - eps,
                               inner(n2, n2) + eps, inner(x, y), inner(x, n1), inner(x, n2),
                               inner(y, n1), inner(y, n2), inner(n1, n2)},
                              epsilon};
}

/// Determinant of the 4x4 matrix whose rows are the given vectors.
inline double det4(const NeutralVector& r0, const NeutralVector& r1, const NeutralVector& r2,
                   const NeutralVector& r3) {
  const std::array<std::array<double, 4>, 4> m{r0.c, r1.c, r2.c, r3.c};
  auto det3 = [&](int skip) {
    std::array<int, 3> cols{};
    for (int c = 0, k = 0; c < 4; ++c)
      if (c != skip) cols[k++] = c;
    const auto& a = m[1];
    const auto& b = m[2];
    const auto& d = m[3];
    return a[cols[0]] * (b[cols[1]] * d[cols[2]] - b[cols[2]] * d[cols[1]]) -
           a[cols[1]] * (b[cols[0]] * d[cols[2]] - b[cols[2]] * d[cols[0]]) +
           a[cols[2]] * (b[cols[0]] * d[cols[1]] - b[cols[1]] * d[cols[0]]);
  };
  double det = 0.0;
  for (int c = 0; c < 4; ++c) det += ((c % 2 == 0) ? 1.0 : -1.0) * m[0][c] * det3(c);
  return det;
}

}  // namespace minlor
