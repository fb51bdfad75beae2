#include "suflow/initial_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "suflow/errors.hpp"

namespace suflow {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// Orientation-reversed inverse stereographic projection: degree +1 against
// the (x, y) orientation, tends to the north pole at infinity.
void inverse_stereographic(double y1, double y2, std::span<double> out) {
  const double r2 = y1 * y1 + y2 * y2;
  out[0] = 2.0 * y1 / (1.0 + r2);
  out[1] = -2.0 * y2 / (1.0 + r2);
  out[2] = (r2 - 1.0) / (1.0 + r2);
}

const std::vector<double> kNorth{0.0, 0.0, 1.0};

// Bubble of scale s at displacement d, glued to the north pole between
// radii r_in and r_out.
void glued_value(const Vec2& d, double s, double r_in, double r_out, std::span<double> out) {
  const double r = std::hypot(d[0], d[1]);
  if (r >= r_out) {
    std::copy(kNorth.begin(), kNorth.end(), out.begin());
    return;
  }
  inverse_stereographic(d[0] / s, d[1] / s, out);
  if (r <= r_in) return;
  const double chi = smoothstep5((r_out - r) / (r_out - r_in));
  std::vector<double> v(3), b(out.begin(), out.end());
  sphere::log_point_into(kNorth, b, v);
  for (double& c : v) c *= chi;
  sphere::exp_point_into(kNorth, v, out);
}

}  // namespace

MapField make_constant(const TorusGrid& grid, int k) {
  MapField f(grid, k);
  for (std::size_t n = 0; n < f.nodes(); ++n) f.at(n)[k - 1] = 1.0;
  return f;
}

MapField make_equatorial_wrap(const TorusGrid& grid, int k, int d) {
  MapField f(grid, k);
  for (std::size_t n = 0; n < f.nodes(); ++n) {
    const double x = grid.position(n)[0];
    const double a = 2.0 * kPi * d * x / grid.L;
    f.at(n)[0] = std::cos(a);
    f.at(n)[1] = std::sin(a);
  }
  return f;
}

MapField make_glued_bubbles(const TorusGrid& grid, const std::vector<GluedBubble>& bubbles) {
  if (bubbles.empty()) throw ConfigError("glued_bubble needs at least one bubble");
  std::vector<double> r_out(bubbles.size());
  for (std::size_t i = 0; i < bubbles.size(); ++i) {
    if (!(bubbles[i].s > 0.0)) throw ConfigError("bubble scale must be positive");
    r_out[i] = std::min(16.0 * bubbles[i].s, 0.48 * grid.L);
    for (std::size_t j = 0; j < i; ++j) {
      const Vec2 d = periodic_displacement(grid, bubbles[i].center, bubbles[j].center);
      if (std::hypot(d[0], d[1]) < r_out[i] + r_out[j])
        throw ConfigError("glued bubbles " + std::to_string(j) + " and " + std::to_string(i) +
                          " overlap");
    }
  }
  MapField f = make_constant(grid, 3);
  for (std::size_t n = 0; n < f.nodes(); ++n) {
    const Vec2 x = grid.position(n);
    for (std::size_t i = 0; i < bubbles.size(); ++i) {
      const Vec2 d = periodic_displacement(grid, x, bubbles[i].center);
      if (std::hypot(d[0], d[1]) < r_out[i]) {
        glued_value(d, bubbles[i].s, 0.5 * r_out[i], r_out[i], f.at(n));
        break;
      }
    }
  }
  return f;
}

namespace {

// Tangent noise at the north pole: components 0..k-2, modes |m|, |n| <= 2,
// normalized to unit sup norm.
std::vector<double> fourier_noise(const TorusGrid& grid, int k, std::uint64_t seed) {
  Rng rng(seed);
  struct Mode {
    int m, n;
    double a, b;
  };
  std::vector<std::vector<Mode>> modes(k - 1);
  for (int c = 0; c < k - 1; ++c)
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n) {
        if (m == 0 && n == 0) continue;
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        modes[c].push_back({m, n, a, b});
      }
  std::vector<double> v(grid.size() * k, 0.0);
  double sup = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const Vec2 x = grid.position(node);
    double n2 = 0.0;
    for (int c = 0; c < k - 1; ++c) {
      double s = 0.0;
      for (const Mode& md : modes[c]) {
        const double ph = 2.0 * kPi * (md.m * x[0] + md.n * x[1]) / grid.L;
        s += md.a * std::cos(ph) + md.b * std::sin(ph);
      }
      v[node * k + c] = s;
      n2 += s * s;
    }
    sup = std::max(sup, std::sqrt(n2));
  }
  if (sup > 0.0)
    for (double& c : v) c /= sup;
  return v;
}

}  // namespace

MapField make_fourier_perturbed(const TorusGrid& grid, int k, std::uint64_t seed,
                                double amplitude) {
  const std::vector<double> v = fourier_noise(grid, k, seed);
  MapField f(grid, k);
  std::vector<double> y(k);
  for (std::size_t n = 0; n < f.nodes(); ++n) {
    for (int c = 0; c < k; ++c) y[c] = amplitude * v[n * k + c];
    y[k - 1] += 1.0;
    const auto p = sphere::project(y);
    std::copy(p.begin(), p.end(), f.at(n).begin());
  }
  return f;
}

LongNeck make_long_neck(const TorusGrid& grid) {
  const double L = grid.L;
  const Vec2 c{0.5 * L, 0.5 * L};
  const double lambda_b = 0.004 * L, cut = 0.016 * L;
  const double r0 = 0.025 * L, r1 = 0.2 * L;
  const std::vector<double> q = kNorth;
  const std::vector<double> p = sphere::exp_point(q, std::vector<double>{0.1, 0.0, 0.0});
  const std::vector<double> m = sphere::exp_point(q, std::vector<double>{0.05, 0.199, 0.0});
  const double d1 = sphere::distance(q, m), d2 = sphere::distance(m, p);

  LongNeck out;
  out.field = MapField(grid, 3);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Vec2 d = periodic_displacement(grid, grid.position(n), c);
    const double r = std::hypot(d[0], d[1]);
    auto u = out.field.at(n);
    if (r < cut) {
      glued_value(d, lambda_b, 0.5 * cut, cut, u);
    } else if (r <= r0) {
      std::copy(q.begin(), q.end(), u.begin());
    } else if (r >= r1) {
      std::copy(p.begin(), p.end(), u.begin());
    } else {
      const double s = std::log(r / r0) / std::log(r1 / r0) * (d1 + d2);
      const auto g = s <= d1 ? sphere::geodesic(q, m, s / d1) : sphere::geodesic(m, p, (s - d1) / d2);
      std::copy(g.begin(), g.end(), u.begin());
    }
  }
  out.spec.center = c;
  out.spec.p = p;
  out.spec.q = q;
  out.spec.a = 2.0 * 0.02 * L;
  out.spec.b = 0.5 * 0.24 * L;
  out.path_length = d1 + d2;
  return out;
}

MapField make_initial_map(const ScenarioConfig& cfg) {
  const TorusGrid grid = cfg.grid();
  switch (cfg.initial.kind) {
    case InitialMapSpec::Kind::constant: return make_constant(grid, cfg.k);
    case InitialMapSpec::Kind::equatorial_wrap:
      return make_equatorial_wrap(grid, cfg.k, cfg.initial.d);
    case InitialMapSpec::Kind::glued_bubble: return make_glued_bubbles(grid, cfg.initial.bubbles);
    case InitialMapSpec::Kind::fourier_perturbed:
      return make_fourier_perturbed(grid, cfg.k, cfg.initial.seed, cfg.initial.amplitude);
    case InitialMapSpec::Kind::long_neck: return make_long_neck(grid).field;
  }
  throw ConfigError("unknown initial map");
}

double l2_distance(const MapField& a, const MapField& b) {
  if (a.values.size() != b.values.size()) throw DomainError("fields differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s) * a.grid.h();
}

MapField perturb_l2(const MapField& field, std::uint64_t seed, double l2_size) {
  const int k = field.k;
  const std::vector<double> noise = fourier_noise(field.grid, k, seed);
  // Rotate the pole-tangent noise into each node's tangent plane by removing
  // its normal component.
  std::vector<double> t(noise.size());
  for (std::size_t n = 0; n < field.nodes(); ++n) {
    const auto u = field.at(n);
    double dn = 0.0;
    for (int c = 0; c < k; ++c) dn += noise[n * k + c] * u[c];
    for (int c = 0; c < k; ++c) t[n * k + c] = noise[n * k + c] - dn * u[c];
  }
  double s2 = 0.0;
  for (double v : t) s2 += v * v;
  const double scale = l2_size / (std::sqrt(s2) * field.grid.h());
  MapField out = field;
  std::vector<double> y(k);
  for (std::size_t n = 0; n < field.nodes(); ++n) {
    for (int c = 0; c < k; ++c) y[c] = field.at(n)[c] + scale * t[n * k + c];
    const auto p = sphere::project(y);
    std::copy(p.begin(), p.end(), out.at(n).begin());
  }
  return out;
}

}  // namespace suflow
