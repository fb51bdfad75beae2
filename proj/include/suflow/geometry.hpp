#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace suflow {

using Vec2 = std::array<double, 2>;

// Doubly periodic square grid on the flat torus [0,L)^2. Node (ix, iy) sits
// at (ix*h, iy*h) and is stored at linear index iy*nx + ix.
struct TorusGrid {
  int nx = 0;
  int ny = 0;
  double L = 1.0;
  double R_M = 0.25;

  static TorusGrid make(int n, double L, double R_M);
  static TorusGrid make(int n, double L) { return make(n, L, 0.25 * L); }

  double h() const { return L / nx; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(wrap_x(iy, ny)) * nx + wrap_x(ix, nx);
  }
  int ix_of(std::size_t node) const { return static_cast<int>(node % nx); }
  int iy_of(std::size_t node) const { return static_cast<int>(node / nx); }
  Vec2 position(std::size_t node) const {
    return {ix_of(node) * h(), iy_of(node) * h()};
  }
  void validate() const;

  static int wrap_x(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
  }
};

// Minimal signed representative of a - b, each component in (-L/2, L/2].
Vec2 periodic_displacement(const TorusGrid& grid, std::size_t a, std::size_t b);
// Same for continuous points.
Vec2 periodic_displacement(const TorusGrid& grid, const Vec2& a, const Vec2& b);
double wrap_signed(double d, double L);

// Map from the torus grid into the unit sphere S^{k-1} of R^k, stored
// node-major with components innermost.
struct MapField {
  TorusGrid grid;
  int k = 3;
  std::vector<double> values;

  MapField() = default;
  MapField(const TorusGrid& g, int k_dim);

  std::size_t nodes() const { return grid.size(); }
  std::span<double> at(std::size_t node) {
    return {values.data() + node * k, static_cast<std::size_t>(k)};
  }
  std::span<const double> at(std::size_t node) const {
    return {values.data() + node * k, static_cast<std::size_t>(k)};
  }
  // Largest | |u| - 1 | over nodes.
  double max_norm_defect() const;
};

// Pointwise geometry of the round unit sphere in R^k. All vectors are spans
// of length k; outputs are written to caller-provided storage.
namespace sphere {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

std::vector<double> project(std::span<const double> y);
// A(p)(X,Y) = (X.Y) p.
std::vector<double> second_fundamental_form(std::span<const double> p,
                                            std::span<const double> X,
                                            std::span<const double> Y);
std::vector<double> exp_point(std::span<const double> p, std::span<const double> v);
std::vector<double> log_point(std::span<const double> p, std::span<const double> q);
std::vector<double> geodesic(std::span<const double> p, std::span<const double> q,
                             double s);
double distance(std::span<const double> p, std::span<const double> q);

// Allocation-free variants used in inner loops; k is the span length.
void exp_point_into(std::span<const double> p, std::span<const double> v,
                    std::span<double> out);
void log_point_into(std::span<const double> p, std::span<const double> q,
                    std::span<double> out);

}  // namespace sphere

}  // namespace suflow
