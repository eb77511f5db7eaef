#ifndef VAREXP_GRID_HPP
#define VAREXP_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace varexp {

//! Node coordinate; x[1] is unused (0) on 1-d grids.
using Point = std::array<double, 2>;

//! Uniform tensor-product grid over an interval (dim 1) or an axis-aligned
//! rectangle (dim 2). Node i along an axis sits at lo + i*h; every node is
//! either a boundary node or an interior node, never both.
struct Grid {
  int dim = 1;
  std::array<std::array<double, 2>, 2> extents{{{0.0, 1.0}, {0.0, 1.0}}};
  std::array<std::size_t, 2> n{0, 1};  // nodes per axis; n[1]==1 when dim==1
  std::array<double, 2> h{0.0, 0.0};

  std::size_t node_count() const { return n[0] * n[1]; }

  std::size_t index(std::size_t i, std::size_t j = 0) const { return i + n[0] * j; }

  std::array<std::size_t, 2> multi_index(std::size_t idx) const {
    return {idx % n[0], idx / n[0]};
  }

  Point coord(std::size_t idx) const {
    const auto ij = multi_index(idx);
    Point x{extents[0][0] + static_cast<double>(ij[0]) * h[0], 0.0};
    if (dim == 2) x[1] = extents[1][0] + static_cast<double>(ij[1]) * h[1];
    return x;
  }

  bool is_boundary(std::size_t idx) const {
    const auto ij = multi_index(idx);
    if (ij[0] == 0 || ij[0] + 1 == n[0]) return true;
    if (dim == 2 && (ij[1] == 0 || ij[1] + 1 == n[1])) return true;
    return false;
  }

  //! Trapezoidal quadrature weight of a node (tensor product of axis weights).
  double weight(std::size_t idx) const {
    const auto ij = multi_index(idx);
    double w = h[0] * ((ij[0] == 0 || ij[0] + 1 == n[0]) ? 0.5 : 1.0);
    if (dim == 2) w *= h[1] * ((ij[1] == 0 || ij[1] + 1 == n[1]) ? 0.5 : 1.0);
    return w;
  }

  //! Radius of the largest ball inscribed in the domain.
  double inradius() const {
    double r = 0.5 * (extents[0][1] - extents[0][0]);
    if (dim == 2) r = std::min(r, 0.5 * (extents[1][1] - extents[1][0]));
    return r;
  }

  double measure() const {
    double m = extents[0][1] - extents[0][0];
    if (dim == 2) m *= extents[1][1] - extents[1][0];
    return m;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(int dim, const std::array<std::array<double, 2>, 2>& extents,
                      const std::array<std::size_t, 2>& n) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("make_grid: dim must be 1 or 2");
  Grid g;
  g.dim = dim;
  g.extents = extents;
  g.n = {n[0], dim == 2 ? n[1] : std::size_t(1)};
  for (int d = 0; d < dim; ++d) {
    if (g.n[d] < 3)
      throw std::invalid_argument("make_grid: need at least 3 nodes per axis, got " +
                                  std::to_string(g.n[d]));
    const double lo = extents[d][0], hi = extents[d][1];
    if (!(lo < hi))
      throw std::invalid_argument("make_grid: degenerate extents on axis " + std::to_string(d));
    g.h[d] = (hi - lo) / static_cast<double>(g.n[d] - 1);
  }
  return g;
}

inline Grid make_interval(double lo, double hi, std::size_t n) {
  return make_grid(1, {{{lo, hi}, {0.0, 1.0}}}, {n, 1});
}

inline Grid make_rectangle(double lo0, double hi0, double lo1, double hi1, std::size_t n0,
                           std::size_t n1) {
  return make_grid(2, {{{lo0, hi0}, {lo1, hi1}}}, {n0, n1});
}

//! Real-valued nodal field over a grid.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(g), values(g.node_count(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

template <class Fn>
ScalarField field_from(const Grid& g, Fn&& fn) {
  ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g.coord(i));
  return f;
}

inline ScalarField constant_field(const Grid& g, double c) { return ScalarField(g, c); }

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

inline void require_finite(const ScalarField& f, const char* what) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i]))
      throw std::runtime_error(std::string(what) + ": non-finite value at node " +
                               std::to_string(i));
}

inline double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double max_value(const ScalarField& f) {
  return *std::max_element(f.values.begin(), f.values.end());
}

inline double min_value(const ScalarField& f) {
  return *std::min_element(f.values.begin(), f.values.end());
}

//! Largest |f| over interior nodes; 0 when the grid has no interior.
inline double sup_norm_interior(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.grid.is_boundary(i)) m = std::max(m, std::abs(f[i]));
  return m;
}

//! Exact distance to the boundary of the interval/rectangle.
//! Zero exactly on boundary nodes by construction of the uniform grid.
inline ScalarField distance_field(const Grid& g) {
  ScalarField d(g);
  for (std::size_t idx = 0; idx < d.size(); ++idx) {
    const Point x = g.coord(idx);
    double dist = std::min(x[0] - g.extents[0][0], g.extents[0][1] - x[0]);
    if (g.dim == 2)
      dist = std::min(dist, std::min(x[1] - g.extents[1][0], g.extents[1][1] - x[1]));
    if (g.is_boundary(idx)) dist = 0.0;  // kill rounding residue on boundary nodes
    d[idx] = std::max(dist, 0.0);
  }
  return d;
}

//! Composite trapezoidal quadrature with a fixed (node-index) summation order.
inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.grid.weight(i) * f[i];
  return s;
}

template <class Fn>
double integrate(const Grid& g, Fn&& fn) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) s += g.weight(i) * fn(g.coord(i));
  return s;
}

//! Per-axis components of the nodal finite-difference gradient.
struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 2> comp;

  explicit VectorField(const Grid& g) : grid(g) {
    comp[0].assign(g.node_count(), 0.0);
    if (g.dim == 2) comp[1].assign(g.node_count(), 0.0);
  }

  double magnitude(std::size_t i) const {
    const double gx = comp[0][i];
    const double gy = grid.dim == 2 ? comp[1][i] : 0.0;
    return std::hypot(gx, gy);
  }
};

//! Centered differences at interior nodes, one-sided second-order stencils on
//! the boundary. Exact for affine fields; centered rows exact on quadratics.
inline VectorField gradient(const ScalarField& f) {
  const Grid& g = f.grid;
  for (int d = 0; d < g.dim; ++d)
    if (g.n[d] < 3) throw std::invalid_argument("gradient: need n >= 3 per axis");
  VectorField out(g);
  const auto deriv = [](double um, double u0, double up, double h, std::size_t pos,
                        std::size_t last) {
    if (pos == 0) return (-3.0 * u0 + 4.0 * um - up) / (2.0 * h);  // um=u1, up=u2 here
    if (pos == last) return (3.0 * u0 - 4.0 * um + up) / (2.0 * h);  // um=u_{n-2}, up=u_{n-3}
    return (up - um) / (2.0 * h);
  };
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    const auto ij = g.multi_index(idx);
    {  // axis 0
      const std::size_t i = ij[0], last = g.n[0] - 1;
      double um, up;
      if (i == 0) {
        um = f[g.index(1, ij[1])];
        up = f[g.index(2, ij[1])];
      } else if (i == last) {
        um = f[g.index(last - 1, ij[1])];
        up = f[g.index(last - 2, ij[1])];
      } else {
        um = f[g.index(i - 1, ij[1])];
        up = f[g.index(i + 1, ij[1])];
      }
      out.comp[0][idx] = deriv(um, f[idx], up, g.h[0], i, last);
    }
    if (g.dim == 2) {  // axis 1
      const std::size_t j = ij[1], last = g.n[1] - 1;
      double um, up;
      if (j == 0) {
        um = f[g.index(ij[0], 1)];
        up = f[g.index(ij[0], 2)];
      } else if (j == last) {
        um = f[g.index(ij[0], last - 1)];
        up = f[g.index(ij[0], last - 2)];
      } else {
        um = f[g.index(ij[0], j - 1)];
        up = f[g.index(ij[0], j + 1)];
      }
      out.comp[1][idx] = deriv(um, f[idx], up, g.h[1], j, last);
    }
  }
  return out;
}

}  // namespace varexp

#endif  // VAREXP_GRID_HPP
