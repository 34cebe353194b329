#pragma once

#include <cstddef>
#include <vector>

#include "minlor/error.hpp"
#include "minlor/scalar_field.hpp"

namespace minlor {

struct UV {
  double u = 0.0;
  double v = 0.0;
};

/// Rectangular lattice u_i = u0 + i h, v_j = v0 + j h, 0 <= i < nu, 0 <= j < nv.
struct GridSpec {
  double u0 = 0.0;
  double v0 = 0.0;
  double h = 1e-3;
  std::size_t nu = 1;
  std::size_t nv = 1;

  double u(std::size_t i) const { return u0 + static_cast<double>(i) * h; }
  double v(std::size_t j) const { return v0 + static_cast<double>(j) * h; }
  double u_last() const { return u(nu - 1); }
  double v_last() const { return v(nv - 1); }
  std::size_t size() const { return nu * nv; }

  void validate() const {
    if (nu == 0 || nv == 0) throw Error(ErrorKind::empty_grid, "grid has no points");
    if (!(h > 0.0)) throw Error(ErrorKind::precondition, "grid spacing must be positive");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Values on a GridSpec lattice, indexed (i, j) with i along u.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t nu, std::size_t nv, const T& fill = T{}) : nu_(nu), nv_(nv), data_(nu * nv, fill) {}

  T& at(std::size_t i, std::size_t j) { return data_[i * nv_ + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data_[i * nv_ + j]; }

  std::size_t nu() const { return nu_; }
  std::size_t nv() const { return nv_; }
  bool empty() const { return data_.empty(); }
  const std::vector<T>& values() const { return data_; }

 private:
  std::size_t nu_ = 0;
  std::size_t nv_ = 0;
  std::vector<T> data_;
};

/// nu x nv points spread uniformly over `r` shrunk by `margin` on every side.
/// A single point along an axis sits at the centre.
inline std::vector<UV> uniform_samples(const Rect& r, std::size_t nu, std::size_t nv, double margin = 0.0) {
  if (nu == 0 || nv == 0) throw Error(ErrorKind::empty_grid, "sample grid has no points");
  const double u0 = r.u_min + margin, u1 = r.u_max - margin;
  const double v0 = r.v_min + margin, v1 = r.v_max - margin;
  if (!(u1 >= u0) || !(v1 >= v0)) throw Error(ErrorKind::precondition, "margin exceeds the rectangle");
  std::vector<UV> out;
  out.reserve(nu * nv);
  for (std::size_t i = 0; i < nu; ++i) {
    const double u = nu == 1 ? 0.5 * (u0 + u1) : u0 + (u1 - u0) * static_cast<double>(i) / static_cast<double>(nu - 1);
    for (std::size_t j = 0; j < nv; ++j) {
      const double v =
          nv == 1 ? 0.5 * (v0 + v1) : v0 + (v1 - v0) * static_cast<double>(j) / static_cast<double>(nv - 1);
      out.push_back({u, v});
    }
  }
  return out;
}

inline std::vector<UV> lattice_points(const GridSpec& g) {
  g.validate();
  std::vector<UV> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i < g.nu; ++i)
    for (std::size_t j = 0; j < g.nv; ++j) out.push_back({g.u(i), g.v(j)});
  return out;
}

}  // namespace minlor
