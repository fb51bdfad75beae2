#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "suflow/errors.hpp"
#include "suflow/flow.hpp"
#include "suflow/surgery.hpp"

namespace suflow {

namespace {

constexpr int kLoopSamples = 256;

// Per-neck geometry shared by the competitor and the reference maps.
struct NeckGeometry {
  const NeckSpec* spec = nullptr;
  std::size_t index = 0;
  double delta = 0.0;
  double ell = 0.0;  // lambda R
};

std::vector<NeckGeometry> check_specs(const MapField& field, const std::vector<NeckSpec>& specs) {
  const TorusGrid& g = field.grid;
  std::vector<NeckGeometry> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const NeckSpec& s = specs[i];
    const std::string name = "neck " + std::to_string(i);
    try {
      s.validate();
    } catch (const DomainError& e) {
      throw DomainError(name + ": " + e.what());
    }
    if (s.b - s.a < 8.0 * g.h()) throw DomainError(name + ": unresolved (b - a < 8h)");
    if (s.delta() >= 0.5 * g.L) throw DomainError(name + ": outer radius exceeds half the torus");
    for (int t = 0; t < kLoopSamples; ++t) {
      const double th = 2.0 * std::numbers::pi * t / kLoopSamples;
      const Vec2 dir{std::cos(th), std::sin(th)};
      const auto outer = sample_field(field, {s.center[0] + s.delta() * dir[0],
                                              s.center[1] + s.delta() * dir[1]});
      const auto inner = sample_field(field, {s.center[0] + s.lambda_R() * dir[0],
                                              s.center[1] + s.lambda_R() * dir[1]});
      if (sphere::distance(s.p, outer) >= 0.5 * std::numbers::pi)
        throw DomainError(name + ": outer loop leaves the hemisphere around p");
      if (sphere::distance(s.q, inner) >= 0.5 * std::numbers::pi)
        throw DomainError(name + ": inner loop leaves the hemisphere around q");
    }
    for (const NeckGeometry& o : out) {
      const Vec2 d = periodic_displacement(g, s.center, o.spec->center);
      if (std::hypot(d[0], d[1]) < s.delta() + o.delta)
        throw DomainError(name + ": overlaps neck " + std::to_string(o.index));
    }
    out.push_back({&s, i, s.delta(), s.lambda_R()});
  }
  return out;
}

// exp_c[s * log_c u(theta, radius)].
void cone_value(const MapField& field, const NeckGeometry& n, std::span<const double> c,
                double radius, double theta, double s, std::span<double> out) {
  const NeckSpec& sp = *n.spec;
  const auto loop = sample_field(field, {sp.center[0] + radius * std::cos(theta),
                                         sp.center[1] + radius * std::sin(theta)});
  std::vector<double> v(c.size());
  sphere::log_point_into(c, loop, v);
  for (double& x : v) x *= s;
  sphere::exp_point_into(c, v, out);
}

void outer_cone(const MapField& f, const NeckGeometry& n, double r, double th,
                std::span<double> out) {
  const double half = 0.5 * n.delta;
  cone_value(f, n, n.spec->p, n.delta, th, (r - half) / half, out);
}

void inner_cone(const MapField& f, const NeckGeometry& n, double r, double th,
                std::span<double> out) {
  cone_value(f, n, n.spec->q, n.ell, th, (2.0 * n.ell - r) / n.ell, out);
}

void geodesic_value(const NeckGeometry& n, double r, std::span<double> out) {
  const double lo = std::log(2.0 * n.ell), hi = std::log(0.5 * n.delta);
  const double s = std::clamp((std::log(r) - lo) / (hi - lo), 0.0, 1.0);
  const auto g = sphere::geodesic(n.spec->q, n.spec->p, s);
  std::copy(g.begin(), g.end(), out.begin());
}

// Locates the neck containing node x, returning its index and polar coords.
bool locate(const TorusGrid& g, const std::vector<NeckGeometry>& necks, std::size_t node,
            std::size_t& which, double& r, double& th) {
  for (std::size_t i = 0; i < necks.size(); ++i) {
    const Vec2 d = periodic_displacement(g, g.position(node), necks[i].spec->center);
    const double rr = std::hypot(d[0], d[1]);
    if (rr >= necks[i].ell && rr <= necks[i].delta) {
      which = i;
      r = rr;
      th = std::atan2(d[1], d[0]);
      return true;
    }
  }
  return false;
}

}  // namespace

Competitor build_competitor(const MapField& field, const std::vector<NeckSpec>& specs) {
  const TorusGrid& g = field.grid;
  const std::vector<NeckGeometry> necks = check_specs(field, specs);
  Competitor c;
  c.field = field;
  c.surgery_mask.assign(g.size(), 0);
  std::vector<char> region(g.size(), 0);  // 0 kept, 1 cone, 2 geodesic
  for (std::size_t node = 0; node < g.size(); ++node) {
    std::size_t i;
    double r, th;
    if (!locate(g, necks, node, i, r, th)) continue;
    c.surgery_mask[node] = 1;
    const NeckGeometry& n = necks[i];
    auto out = c.field.at(node);
    if (r > 0.5 * n.delta) {
      outer_cone(field, n, r, th, out);
      region[node] = 1;
    } else if (r < 2.0 * n.ell) {
      inner_cone(field, n, r, th, out);
      region[node] = 1;
    } else {
      geodesic_value(n, r, out);
      region[node] = 2;
    }
  }
  const std::vector<double> e = energy_density(c.field);
  const double h2 = g.h() * g.h();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double v = e[node] * h2;
    if (region[node] == 0)
      c.energies.kept += v;
    else if (region[node] == 1)
      c.energies.cones += v;
    else
      c.energies.geodesic += v;
  }
  return c;
}

ReferenceMaps build_reference_map(const MapField& field, const std::vector<NeckSpec>& specs) {
  const TorusGrid& g = field.grid;
  const std::vector<NeckGeometry> necks = check_specs(field, specs);
  const double shift = std::log(4.0);
  for (const NeckGeometry& n : necks)
    if (!(n.delta / n.ell > 16.0 * (1.0 + 1e-12)))
      throw DomainError("neck " + std::to_string(n.index) + ": too short to squeeze");
  ReferenceMaps out{field, field};
  for (std::size_t node = 0; node < g.size(); ++node) {
    std::size_t i;
    double r, th;
    if (!locate(g, necks, node, i, r, th)) continue;
    const NeckGeometry& n = necks[i];
    auto w = out.w.at(node);
    auto wt = out.w_tilde.at(node);
    const double d = n.delta, l = n.ell;
    if (r > 0.5 * d) {
      outer_cone(field, n, r, th, w);
    } else if (r > 0.25 * d) {
      outer_cone(field, n, d * d / (4.0 * r), th, w);
    } else if (r >= 4.0 * l) {
      const double K = std::log(d / l);
      const double rho = (std::log(r / l) - shift) * K / (K - 2.0 * shift);
      const double r0 = l * std::exp(rho);
      const auto v = sample_field(field, {n.spec->center[0] + r0 * std::cos(th),
                                          n.spec->center[1] + r0 * std::sin(th)});
      std::copy(v.begin(), v.end(), w.begin());
    } else if (r >= 2.0 * l) {
      inner_cone(field, n, 4.0 * l * l / r, th, w);
    } else {
      inner_cone(field, n, r, th, w);
    }
    std::copy(w.begin(), w.end(), wt.begin());
    if (r >= 2.0 * l && r <= 0.5 * d) geodesic_value(n, r, wt);
  }
  return out;
}

std::vector<NeckSpec> neck_specs_from_tree(const BubbleTree& tree) {
  std::vector<NeckSpec> specs;
  for (const BubbleNode& b : tree.nodes) {
    NeckSpec s;
    s.center = b.center;
    s.p = b.p;
    s.q = b.q;
    s.a = 2.0 * b.neck_inner;
    s.b = 0.5 * b.neck_outer;
    if (s.b / s.a >= std::exp(1.0)) specs.push_back(std::move(s));
  }
  return specs;
}

Closeness close_maps_homotopic(const MapField& f1, const MapField& f2, double sigma,
                               const std::vector<char>* exclude) {
  if (f1.grid.nx != f2.grid.nx || f1.k != f2.k || f1.grid.L != f2.grid.L)
    throw DomainError("closeness needs fields on the same grid");
  Closeness c;
  for (std::size_t n = 0; n < f1.nodes(); ++n) {
    if (exclude && (*exclude)[n]) continue;
    c.max_distance = std::max(c.max_distance, sphere::distance(f1.at(n), f2.at(n)));
  }
  c.close = c.max_distance < sigma;
  return c;
}

}  // namespace suflow
