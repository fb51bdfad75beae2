#include "suflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "suflow/errors.hpp"

namespace suflow {

TorusGrid TorusGrid::make(int n, double L, double R_M) {
  TorusGrid g;
  g.nx = n;
  g.ny = n;
  g.L = L;
  g.R_M = R_M;
  g.validate();
  return g;
}

void TorusGrid::validate() const {
  if (nx != ny) throw ConfigError("grid must be square (nx = ny)");
  if (nx < 8) throw ConfigError("nx >= 8 required, got " + std::to_string(nx));
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("side length L must be positive");
  if (!(R_M > 0.0) || R_M > 0.25 * L * (1.0 + 1e-12))
    throw ConfigError("cutoff radius R_M must lie in (0, L/4]");
}

double wrap_signed(double d, double L) {
  double r = std::fmod(d, L);
  if (r > 0.5 * L) r -= L;
  if (r <= -0.5 * L) r += L;
  return r;
}

namespace {

int wrap_index_delta(int d, int n) {
  int r = TorusGrid::wrap_x(d, n);
  // r in [0, n); ties at n/2 stay positive.
  if (2 * r > n) r -= n;
  return r;
}

}  // namespace

Vec2 periodic_displacement(const TorusGrid& grid, std::size_t a, std::size_t b) {
  const double h = grid.h();
  const int dx = wrap_index_delta(grid.ix_of(a) - grid.ix_of(b), grid.nx);
  const int dy = wrap_index_delta(grid.iy_of(a) - grid.iy_of(b), grid.ny);
  return {dx * h, dy * h};
}

Vec2 periodic_displacement(const TorusGrid& grid, const Vec2& a, const Vec2& b) {
  return {wrap_signed(a[0] - b[0], grid.L), wrap_signed(a[1] - b[1], grid.L)};
}

MapField::MapField(const TorusGrid& g, int k_dim)
    : grid(g), k(k_dim), values(g.size() * static_cast<std::size_t>(k_dim), 0.0) {
  if (k_dim < 3) throw ConfigError("ambient dimension k >= 3 required");
}

double MapField::max_norm_defect() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < nodes(); ++n)
    worst = std::max(worst, std::abs(sphere::norm(at(n)) - 1.0));
  return worst;
}

namespace sphere {

namespace {

constexpr double kTangentTol = 1e-8;

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("vector dimension mismatch");
}

void require_unit(std::span<const double> p) {
  if (std::abs(norm(p) - 1.0) > 1e-10) throw DomainError("base point is not a unit vector");
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> project(std::span<const double> y) {
  const double n = norm(y);
  if (!(n > 1e-6)) throw DomainError("projection undefined at origin");
  std::vector<double> out(y.begin(), y.end());
  for (double& c : out) c /= n;
  return out;
}

std::vector<double> second_fundamental_form(std::span<const double> p,
                                            std::span<const double> X,
                                            std::span<const double> Y) {
  require_same_size(p, X);
  require_same_size(p, Y);
  require_unit(p);
  if (std::abs(dot(X, p)) > kTangentTol || std::abs(dot(Y, p)) > kTangentTol)
    throw DomainError("second fundamental form needs tangent arguments");
  const double xy = dot(X, Y);
  std::vector<double> out(p.begin(), p.end());
  for (double& c : out) c *= xy;
  return out;
}

void exp_point_into(std::span<const double> p, std::span<const double> v,
                    std::span<double> out) {
  const double nv = norm(v);
  if (nv >= std::numbers::pi) throw DomainError("outside injectivity radius");
  if (nv <= 1e-15) {
    std::copy(p.begin(), p.end(), out.begin());
    return;
  }
  const double c = std::cos(nv);
  const double s = std::sin(nv) / nv;
  double n2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = c * p[i] + s * v[i];
    n2 += out[i] * out[i];
  }
  // Remove the O(eps) drift off the sphere so results stay exactly unit.
  const double inv = 1.0 / std::sqrt(n2);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] *= inv;
}

std::vector<double> exp_point(std::span<const double> p, std::span<const double> v) {
  require_same_size(p, v);
  require_unit(p);
  if (std::abs(dot(p, v)) > kTangentTol * (1.0 + norm(v)))
    throw DomainError("exp needs a tangent vector");
  std::vector<double> out(p.size());
  exp_point_into(p, v, out);
  return out;
}

void log_point_into(std::span<const double> p, std::span<const double> q,
                    std::span<double> out) {
  const double c = dot(p, q);
  if (c <= -1.0 + 1e-8) throw DomainError("log undefined at cut locus");
  double n2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = q[i] - c * p[i];
    n2 += out[i] * out[i];
  }
  const double s = std::sqrt(n2);
  if (s < 1e-300) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double theta = std::atan2(s, c);
  for (double& o : out) o *= theta / s;
}

std::vector<double> log_point(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  require_unit(p);
  require_unit(q);
  std::vector<double> out(p.size());
  log_point_into(p, q, out);
  return out;
}

double distance(std::span<const double> p, std::span<const double> q) {
  if (std::equal(p.begin(), p.end(), q.begin(), q.end())) return 0.0;
  const double c = dot(p, q);
  double n2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = q[i] - c * p[i];
    n2 += w * w;
  }
  return std::atan2(std::sqrt(n2), c);
}

std::vector<double> geodesic(std::span<const double> p, std::span<const double> q,
                             double s) {
  std::vector<double> v = log_point(p, q);
  for (double& c : v) c *= s;
  std::vector<double> out(p.size());
  exp_point_into(p, v, out);
  return out;
}

}  // namespace sphere

}  // namespace suflow
