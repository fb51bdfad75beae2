#include "suflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "suflow/errors.hpp"

namespace suflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> density_of(const MapField& field) { return energy_density(field); }

std::size_t offset_node(const TorusGrid& g, std::size_t center, int dx, int dy) {
  return g.index(g.ix_of(center) + dx, g.iy_of(center) + dy);
}

}  // namespace

double dirichlet_energy(const MapField& field) {
  const kernels::View v = view_of(field);
  std::vector<double> e(field.nodes()), w(field.nodes());
  const auto s = kernels::omp::density(v, field.values.data(), 1.0 + 1e-9, 1.0, e.data(),
                                       w.data());
  return s.e * v.h * v.h;
}

double alpha_energy(const MapField& field, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("alpha_energy needs alpha >= 1");
  const kernels::View v = view_of(field);
  std::vector<double> e(field.nodes()), w(field.nodes());
  if (alpha == 1.0) {
    const auto s = kernels::omp::density(v, field.values.data(), 1.0 + 1e-9, 1.0, e.data(),
                                         w.data());
    return s.e * v.h * v.h + field.grid.L * field.grid.L;
  }
  const auto s = kernels::omp::density(v, field.values.data(), alpha, 1.0, e.data(), w.data());
  return s.e_alpha_one * v.h * v.h;
}

Degree degree(const MapField& field) {
  Degree d;
  d.real = degree_real(field);
  d.integer = std::lround(d.real);
  return d;
}

EnergyReport energy_report(const MapField& field, const FlowParams& params, double E0) {
  EnergyReport r;
  const kernels::View v = view_of(field);
  std::vector<double> e(field.nodes()), w(field.nodes());
  const auto s = kernels::omp::density(v, field.values.data(), params.alpha,
                                       params.r_scale * params.r_scale, e.data(), w.data());
  r.E = s.e * v.h * v.h;
  r.E_alpha = s.e_alpha_one * v.h * v.h;
  r.sup_e = s.sup_e;
  r.tau_norm = tension_alpha(field, params).l2_norm;
  if (field.k == 3) {
    const Degree d = degree(field);
    r.has_degree = true;
    r.degree_real = d.real;
    r.degree_int = d.integer;
  }
  r.E0 = E0;
  return r;
}

DiskStencil disk_stencil(const TorusGrid& grid, double radius) {
  if (radius >= 0.5 * grid.L) throw DomainError("disk radius must stay below L/2");
  DiskStencil s;
  const double h = grid.h();
  const int m = static_cast<int>(std::ceil(radius / h));
  const double r2 = radius * radius * (1.0 + 1e-12);
  for (int dy = -m; dy <= m; ++dy)
    for (int dx = -m; dx <= m; ++dx) {
      const double d2 = (dx * dx + dy * dy) * h * h;
      if (d2 <= r2) {
        s.offsets.push_back({dx, dy});
        s.dist2.push_back(d2);
      }
    }
  return s;
}

double ball_integral(const TorusGrid& grid, const std::vector<double>& density,
                     std::size_t center, double radius) {
  const DiskStencil s = disk_stencil(grid, radius);
  double sum = 0.0;
  for (const auto& o : s.offsets) sum += density[offset_node(grid, center, o[0], o[1])];
  return sum * grid.h() * grid.h();
}

double cutoff(double r, double R_M) {
  if (r <= 0.5 * R_M) return 1.0;
  if (r >= R_M) return 0.0;
  const double s = (R_M - r) / (0.5 * R_M);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double local_energy_residual(const FlowRun& run, std::size_t x, double R, double t1, double t2,
                             double C_fit) {
  if (!(t1 < t2)) throw DomainError("local energy residual needs t1 < t2");
  const Snapshot* s1 = run.snapshot_at(t1);
  const Snapshot* s2 = run.snapshot_at(t2);
  if (!s1 || !s2) throw DomainError("missing snapshot for local energy residual");
  const TorusGrid& g = s1->field.grid;
  if (2.0 * R > g.R_M * (1.0 + 1e-12)) throw DomainError("local energy residual needs 2R <= R_M");
  const double alpha = run.params.alpha;
  auto e_alpha = [alpha](const MapField& f) {
    std::vector<double> e = energy_density(f);
    for (double& v : e) v = std::pow(1.0 + v, alpha);
    return e;
  };
  const double inner = ball_integral(g, e_alpha(s2->field), x, R);
  const double outer = ball_integral(g, e_alpha(s1->field), x, 2.0 * R);
  return inner - outer - C_fit * (t2 - t1) * run.E0 / (R * R);
}

MonotonicityProbe MonotonicityProbe::make(const TorusGrid& grid, std::size_t center, double t0,
                                          std::vector<double> radii) {
  MonotonicityProbe p;
  p.center = center;
  p.t0 = t0;
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end())
    throw DomainError("probe radii must be strictly increasing");
  for (double r : radii)
    if (!(r > 0.0) || 4.0 * r * r > t0 * (1.0 + 1e-12))
      throw DomainError("probe radius violates 4 rho^2 <= t0");
  p.radii = std::move(radii);
  p.phi.resize(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Vec2 d = periodic_displacement(grid, n, center);
    p.phi[n] = cutoff(std::hypot(d[0], d[1]), grid.R_M);
  }
  return p;
}

std::vector<double> psi(const FlowRun& run, const MonotonicityProbe& probe, double alpha) {
  if (run.snapshots.empty()) throw DomainError("run has no snapshots");
  const TorusGrid& g = run.snapshots.front().field.grid;
  const DiskStencil support = disk_stencil(g, g.R_M);
  const double h2 = g.h() * g.h();
  std::vector<double> cache(run.snapshots.size(), kNaN);

  // Space integral of (1+e)^alpha G phi^2 at one snapshot.
  auto integrand = [&](std::size_t i) {
    if (!std::isnan(cache[i])) return cache[i];
    const Snapshot& s = run.snapshots[i];
    const double tau = probe.t0 - s.t;
    if (!(tau > 0.0)) throw DomainError("snapshot at or after t0 inside a Psi window");
    const std::vector<double> e = energy_density(s.field);
    double sum = 0.0;
    for (std::size_t j = 0; j < support.offsets.size(); ++j) {
      const std::size_t n =
          offset_node(g, probe.center, support.offsets[j][0], support.offsets[j][1]);
      const double phi = probe.phi[n];
      sum += std::pow(1.0 + e[n], alpha) * std::exp(-support.dist2[j] / (4.0 * tau)) / tau *
             phi * phi;
    }
    cache[i] = sum * h2;
    return cache[i];
  };

  std::vector<double> out;
  for (double rho : probe.radii) {
    const double a = probe.t0 - 4.0 * rho * rho;
    const double b = probe.t0 - rho * rho;
    const double tol = 1e-9 * (b - a);
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
      const double t = run.snapshots[i].t;
      if (t >= a - tol && t <= b + tol) inside.push_back(i);
    }
    auto missing = [&](const char* why) {
      std::ostringstream msg;
      msg << "insufficient snapshot coverage for window [" << a << ", " << b << "] (rho " << rho
          << "): " << why;
      return DomainError(msg.str());
    };
    if (inside.size() < 4) throw missing("fewer than 4 samples");
    std::vector<double> ts, fs;
    const std::size_t first = inside.front(), last = inside.back();
    if (run.snapshots[first].t > a + tol) {
      if (first == 0) throw missing("no sample at or before the window start");
      const double t0 = run.snapshots[first - 1].t, t1 = run.snapshots[first].t;
      const double f0 = integrand(first - 1), f1 = integrand(first);
      ts.push_back(a);
      fs.push_back(f0 + (f1 - f0) * (a - t0) / (t1 - t0));
    }
    for (std::size_t i : inside) {
      ts.push_back(run.snapshots[i].t);
      fs.push_back(integrand(i));
    }
    if (run.snapshots[last].t < b - tol) {
      if (last + 1 >= run.snapshots.size() || run.snapshots[last + 1].t >= probe.t0)
        throw missing("no sample at or after the window end");
      const double t0 = run.snapshots[last].t, t1 = run.snapshots[last + 1].t;
      const double f0 = integrand(last), f1 = integrand(last + 1);
      ts.push_back(b);
      fs.push_back(f0 + (f1 - f0) * (b - t0) / (t1 - t0));
    }
    double integral = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i)
      integral += 0.5 * (fs[i] + fs[i - 1]) * (ts[i] - ts[i - 1]);
    out.push_back(std::pow(rho, 2.0 * alpha - 2.0) * integral);
  }
  return out;
}

double almost_monotonicity_check(const std::vector<double>& psi_values,
                                 const std::vector<double>& radii, double E0, double c_fit) {
  if (psi_values.size() != radii.size() || radii.size() < 2)
    throw DomainError("almost monotonicity check needs >= 2 matching radii");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = 0; j < radii.size(); ++j) {
      if (!(radii[i] < radii[j])) continue;
      const double gap = radii[j] - radii[i];
      worst = std::max(worst, psi_values[i] - std::exp(c_fit * gap) * psi_values[j] -
                                  c_fit * E0 * gap);
    }
  return worst;
}

std::optional<double> fit_constant(const std::function<bool(double)>& passes) {
  for (double c : kFitLadder)
    if (passes(c)) return c;
  return std::nullopt;
}

std::vector<double> default_scales(const TorusGrid& grid) {
  std::vector<double> s;
  for (double r = grid.R_M; r >= 4.0 * grid.h() * (1.0 - 1e-12); r *= 0.5) s.push_back(r);
  return s;
}

namespace {

ConcentrationReport detect_impl(const MapField& field, double epsilon_0,
                                std::vector<double> scales) {
  const TorusGrid& g = field.grid;
  if (scales.empty()) throw DomainError("concentration detection needs at least one scale");
  std::sort(scales.begin(), scales.end());
  if (scales.front() < 4.0 * g.h() * (1.0 - 1e-12))
    throw DomainError("smallest concentration scale must be >= 4h");
  ConcentrationReport rep;
  rep.epsilon_0 = epsilon_0;
  rep.scales = scales;
  const std::vector<double> e = density_of(field);
  const double h2 = g.h() * g.h();
  std::vector<DiskStencil> stencils;
  for (double r : scales) stencils.push_back(disk_stencil(g, r));

  std::vector<double> first(g.size());
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t n = g.index(ix, iy);
      double sum = 0.0;
      for (const auto& o : stencils[0].offsets) sum += e[g.index(ix + o[0], iy + o[1])];
      first[n] = sum * h2;
    }
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (first[n] < epsilon_0) continue;
    ConcentrationFlag f;
    f.node = n;
    f.ball_energies.push_back(first[n]);
    bool all = true;
    for (std::size_t s = 1; s < stencils.size() && all; ++s) {
      double sum = 0.0;
      for (const auto& o : stencils[s].offsets) sum += e[offset_node(g, n, o[0], o[1])];
      f.ball_energies.push_back(sum * h2);
      all = sum * h2 >= epsilon_0;
    }
    if (all) {
      f.psi = kNaN;
      rep.flagged.push_back(std::move(f));
    }
  }

  // Cluster flagged nodes by 8-neighbour adjacency on the periodic grid.
  std::vector<int> label(g.size(), -1);
  std::vector<std::size_t> flag_of(g.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < rep.flagged.size(); ++i) flag_of[rep.flagged[i].node] = i;
  int next = 0;
  for (const ConcentrationFlag& f : rep.flagged) {
    if (label[f.node] >= 0) continue;
    std::vector<std::size_t> stack{f.node};
    label[f.node] = next;
    std::size_t best = f.node;
    double best_e = f.ball_energies[0];
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      const double en = rep.flagged[flag_of[n]].ball_energies[0];
      if (en > best_e || (en == best_e && n < best)) {
        best_e = en;
        best = n;
      }
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t m = offset_node(g, n, dx, dy);
          if (flag_of[m] != static_cast<std::size_t>(-1) && label[m] < 0) {
            label[m] = next;
            stack.push_back(m);
          }
        }
    }
    rep.centers.push_back(best);
    ++next;
  }
  return rep;
}

}  // namespace

ConcentrationReport detect_concentration(const MapField& field, double epsilon_0,
                                         std::vector<double> scales) {
  return detect_impl(field, epsilon_0, std::move(scales));
}

ConcentrationReport detect_concentration(const FlowRun& run, double t, double epsilon_0,
                                         std::vector<double> scales) {
  const Snapshot* s = run.snapshot_at(t);
  if (!s) throw DomainError("concentration detection needs a snapshot time");
  ConcentrationReport rep = detect_impl(s->field, epsilon_0, std::move(scales));
  rep.t = s->t;
  const double R = rep.scales.front();
  for (ConcentrationFlag& f : rep.flagged) {
    if (4.0 * R * R > s->t) continue;
    try {
      const auto probe = MonotonicityProbe::make(s->field.grid, f.node, s->t, {R});
      f.psi = psi(run, probe, run.params.alpha).front();
      f.psi_confirms = f.psi >= epsilon_0;
    } catch (const DomainError&) {
      f.psi = kNaN;
    }
  }
  return rep;
}

BochnerReport bochner_residual(const FlowRun& run, double t, double margin, double C_fit) {
  const auto& snaps = run.snapshots;
  if (snaps.size() < 3) throw DomainError("Bochner residual needs three snapshots");
  std::size_t s = 1;
  for (std::size_t i = 1; i + 1 < snaps.size(); ++i)
    if (std::abs(snaps[i].t - t) < std::abs(snaps[s].t - t)) s = i;
  const double dt1 = snaps[s].t - snaps[s - 1].t;
  const double dt2 = snaps[s + 1].t - snaps[s].t;
  if (!(dt1 > 0.0) || std::abs(dt1 - dt2) > 1e-9 * dt1)
    throw DomainError("snapshot spacing nonuniform around Bochner time");
  const MapField& f = snaps[s].field;
  const TorusGrid& g = f.grid;
  const int k = f.k;
  const double alpha = run.params.alpha;
  const double r2 = run.params.r_scale * run.params.r_scale;
  const std::vector<double> e = energy_density(f);
  const std::vector<double> em = energy_density(snaps[s - 1].field);
  const std::vector<double> ep = energy_density(snaps[s + 1].field);
  const Gradient du = gradient(f);
  const double inv_2h = 0.5 / g.h();

  std::vector<double> fx(g.size()), fy(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t n = g.index(ix, iy);
      const double ex = (e[g.index(ix + 1, iy)] - e[g.index(ix - 1, iy)]) * inv_2h;
      const double ey = (e[g.index(ix, iy + 1)] - e[g.index(ix, iy - 1)]) * inv_2h;
      double gxx = 0.0, gxy = 0.0, gyy = 0.0;
      for (int c = 0; c < k; ++c) {
        const double a = du.dx[n * k + c], b = du.dy[n * k + c];
        gxx += a * a;
        gxy += a * b;
        gyy += b * b;
      }
      const double coef = 2.0 * (alpha - 1.0) / (r2 + e[n]);
      fx[n] = (1.0 + coef * gxx) * ex + coef * gxy * ey;
      fy[n] = coef * gxy * ex + (1.0 + coef * gyy) * ey;
    }

  std::size_t peak = 0;
  for (std::size_t n = 1; n < g.size(); ++n)
    if (e[n] > e[peak]) peak = n;

  BochnerReport rep;
  rep.residual.assign(g.size(), kNaN);
  std::size_t nonpos = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t n = g.index(ix, iy);
      const Vec2 d = periodic_displacement(g, n, peak);
      if (margin > 0.0 && std::hypot(d[0], d[1]) < margin) continue;
      const double div = (fx[g.index(ix + 1, iy)] - fx[g.index(ix - 1, iy)]) * inv_2h +
                         (fy[g.index(ix, iy + 1)] - fy[g.index(ix, iy - 1)]) * inv_2h;
      const double et = (ep[n] - em[n]) / (dt1 + dt2);
      const double r = et - div - C_fit * e[n] * (e[n] + 1.0);
      rep.residual[n] = r;
      ++rep.counted;
      if (r <= 0.0) ++nonpos;
    }
  rep.fraction_nonpositive = rep.counted ? static_cast<double>(nonpos) / rep.counted : 1.0;
  return rep;
}

}  // namespace suflow
