#include "suflow/bubbletree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "suflow/diagnostics.hpp"
#include "suflow/errors.hpp"
#include "suflow/flow.hpp"

namespace suflow {

namespace {

double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }

bool in_any(const Vec2& y, const std::vector<Vec2>& centers, const std::vector<double>& radii) {
  for (std::size_t i = 0; i < centers.size(); ++i)
    if (std::hypot(y[0] - centers[i][0], y[1] - centers[i][1]) <= radii[i]) return true;
  return false;
}

PlaneChart make_chart(const MapField& field, const Vec2& center, double lambda,
                      double radius_units, int n) {
  PlaneChart c;
  c.n = n;
  c.k = field.k;
  c.radius_units = radius_units;
  c.lambda = lambda;
  c.center = center;
  c.values.resize(static_cast<std::size_t>(n) * n * field.k);
  const double s = c.spacing();
  const double mid = 0.5 * (n - 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x{center[0] + lambda * (i - mid) * s, center[1] + lambda * (j - mid) * s};
      const std::vector<double> v = sample_field(field, x);
      std::copy(v.begin(), v.end(),
                c.values.begin() + (static_cast<std::size_t>(j) * n + i) * field.k);
    }
  return c;
}

// Projected mean of the field on a circle; falls back to one sample when the
// mean degenerates.
std::vector<double> circle_mean(const MapField& field, const Vec2& c, double r) {
  const int m = 128;
  std::vector<double> acc(field.k, 0.0);
  std::vector<double> first;
  for (int i = 0; i < m; ++i) {
    const double th = 2.0 * std::numbers::pi * i / m;
    const std::vector<double> v = sample_field(field, {c[0] + r * std::cos(th), c[1] + r * std::sin(th)});
    if (i == 0) first = v;
    for (int a = 0; a < field.k; ++a) acc[a] += v[a];
  }
  if (sphere::norm(acc) < 1e-6 * m) return first;
  return sphere::project(acc);
}

struct Candidate {
  std::size_t node;
  double lambda;
  double r_det;
};

std::vector<Candidate> detect_candidates(const MapField& field, const std::vector<double>& e,
                                         double epsilon_1, const TreeOptions& opt) {
  const TorusGrid& g = field.grid;
  const double h2 = g.h() * g.h();
  std::vector<char> mask(g.size(), 0);
  std::vector<Candidate> out;
  auto mask_disk = [&](std::size_t c, double r) {
    const DiskStencil st = disk_stencil(g, std::min(r, 0.49 * g.L));
    for (const auto& o : st.offsets) mask[g.index(g.ix_of(c) + o[0], g.iy_of(c) + o[1])] = 1;
  };
  for (int iter = 0; iter < 4096; ++iter) {
    std::size_t c = g.size();
    for (std::size_t n = 0; n < g.size(); ++n)
      if (!mask[n] && (c == g.size() || e[n] > e[c])) c = n;
    if (c == g.size() || !(e[c] > 0.0)) break;
    const double lambda = 1.0 / std::sqrt(e[c]);
    if (lambda > g.R_M / 8.0) break;
    const double r_det = std::min(opt.zoom_radius_units * lambda, g.R_M);
    const DiskStencil st = disk_stencil(g, r_det);
    double energy = 0.0;
    for (const auto& o : st.offsets) {
      const std::size_t m = g.index(g.ix_of(c) + o[0], g.iy_of(c) + o[1]);
      if (!mask[m]) energy += e[m];
    }
    energy *= h2;
    if (energy >= epsilon_1) {
      if (lambda < 0.25 * g.h()) throw DomainError("bubble below resolution");
      out.push_back({c, lambda, r_det});
      mask_disk(c, r_det);
    } else {
      mask_disk(c, std::max(2.0 * lambda, 2.0 * g.h()));
    }
  }
  return out;
}

}  // namespace

std::vector<double> sample_field(const MapField& field, const Vec2& x) {
  const TorusGrid& g = field.grid;
  const double h = g.h();
  const double fx = x[0] / h, fy = x[1] / h;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  const double tx = fx - x0, ty = fy - y0;
  const int ix = static_cast<int>(x0), iy = static_cast<int>(y0);
  const std::size_t n00 = g.index(ix, iy), n10 = g.index(ix + 1, iy);
  const std::size_t n01 = g.index(ix, iy + 1), n11 = g.index(ix + 1, iy + 1);
  std::vector<double> v(field.k);
  for (int c = 0; c < field.k; ++c)
    v[c] = (1 - tx) * (1 - ty) * field.at(n00)[c] + tx * (1 - ty) * field.at(n10)[c] +
           (1 - tx) * ty * field.at(n01)[c] + tx * ty * field.at(n11)[c];
  if (tx == 0.0 && ty == 0.0) return v;
  return sphere::project(v);
}

std::vector<double> PlaneChart::density() const {
  std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
  const double inv_s2 = 1.0 / (spacing() * spacing());
  auto d2 = [&](int i0, int j0, int i1, int j1) {
    double s = 0.0;
    for (int c = 0; c < k; ++c) {
      const double d = values[(static_cast<std::size_t>(j0) * n + i0) * k + c] -
                       values[(static_cast<std::size_t>(j1) * n + i1) * k + c];
      s += d * d;
    }
    return s;
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double ex, ey;
      if (i == 0)
        ex = d2(1, j, 0, j);
      else if (i == n - 1)
        ex = d2(i, j, i - 1, j);
      else
        ex = 0.5 * (d2(i + 1, j, i, j) + d2(i, j, i - 1, j));
      if (j == 0)
        ey = d2(i, 1, i, 0);
      else if (j == n - 1)
        ey = d2(i, j, i, j - 1);
      else
        ey = 0.5 * (d2(i, j + 1, i, j) + d2(i, j, i, j - 1));
      e[static_cast<std::size_t>(j) * n + i] = (ex + ey) * inv_s2;
    }
  return e;
}

double PlaneChart::center_density() const {
  const int m = (n - 1) / 2;
  return density()[static_cast<std::size_t>(m) * n + m];
}

double PlaneChart::disk_energy(double radius_units_disk, const std::vector<Vec2>& excluded_centers,
                               const std::vector<double>& excluded_radii) const {
  const std::vector<double> e = density();
  const double s = spacing();
  const double mid = 0.5 * (n - 1);
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 y{(i - mid) * s, (j - mid) * s};
      if (norm2(y) > radius_units_disk) continue;
      if (in_any(y, excluded_centers, excluded_radii)) continue;
      sum += e[static_cast<std::size_t>(j) * n + i];
    }
  return sum * s * s;
}

RescaledBubble detect_and_rescale(const MapField& field, const std::optional<Window>& window,
                                  double zoom_radius_units, int chart_n,
                                  double chart_radius_units) {
  const TorusGrid& g = field.grid;
  const std::vector<double> e = energy_density(field);
  std::size_t c = g.size();
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (window) {
      const Vec2 d = periodic_displacement(g, g.position(n), window->center);
      if (norm2(d) > window->radius) continue;
    }
    if (c == g.size() || e[n] > e[c]) c = n;
  }
  if (c == g.size() || !(e[c] > 0.0)) throw DomainError("no energy in bubble window");
  RescaledBubble b;
  b.node = c;
  b.center = g.position(c);
  b.lambda = 1.0 / std::sqrt(e[c]);
  if (b.lambda < 0.25 * g.h()) throw DomainError("bubble below resolution");
  const double radius = chart_radius_units > 0.0 ? chart_radius_units : zoom_radius_units;
  b.chart = make_chart(field, b.center, b.lambda, radius, chart_n);
  return b;
}

double lambda_by_energy(const TorusGrid& g, const std::vector<double>& density,
                        std::size_t center, double epsilon_out, double C_R,
                        const std::vector<Vec2>& excluded_centers,
                        const std::vector<double>& excluded_radii) {
  if (C_R <= 0.0) return epsilon_out;
  const DiskStencil st = disk_stencil(g, epsilon_out);
  const double h2 = g.h() * g.h();
  const Vec2 c = g.position(center);
  std::vector<std::pair<double, double>> shells;  // (distance, energy)
  double total = 0.0;
  for (std::size_t i = 0; i < st.offsets.size(); ++i) {
    const std::size_t m = g.index(g.ix_of(center) + st.offsets[i][0], g.iy_of(center) + st.offsets[i][1]);
    const Vec2 x{c[0] + st.offsets[i][0] * g.h(), c[1] + st.offsets[i][1] * g.h()};
    bool skip = false;
    for (std::size_t j = 0; j < excluded_centers.size() && !skip; ++j)
      skip = norm2(periodic_displacement(g, x, excluded_centers[j])) <= excluded_radii[j];
    if (skip) continue;
    const double en = density[m] * h2;
    shells.emplace_back(std::sqrt(st.dist2[i]), en);
    total += en;
  }
  if (total < C_R) throw DomainError("insufficient energy for neck cut");
  std::sort(shells.begin(), shells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  // Sweep inward; the annulus (lambda, eps] holds every node strictly beyond
  // lambda, so the supremum is the distance at which the running sum first
  // reaches C_R.
  double acc = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    acc += shells[i].second;
    if (acc >= C_R) return shells[i].first;
  }
  return 0.0;
}

double lambda_by_energy(const MapField& field, std::size_t center, double epsilon_out,
                        double C_R, const std::vector<Vec2>& excluded_centers,
                        const std::vector<double>& excluded_radii) {
  return lambda_by_energy(field.grid, energy_density(field), center, epsilon_out, C_R,
                          excluded_centers, excluded_radii);
}

namespace {

struct Structured {
  std::vector<BubbleNode> nodes;
  std::vector<std::size_t> ghosts;  // candidate indices to drop
};

Structured structure(const MapField& field, const std::vector<double>& e,
                     const std::vector<Candidate>& cands, double epsilon_1, double C_R,
                     const TreeOptions& opt) {
  const TorusGrid& g = field.grid;
  const double h2 = g.h() * g.h();
  const std::size_t m = cands.size();
  std::vector<Vec2> pos(m);
  for (std::size_t i = 0; i < m; ++i) pos[i] = g.position(cands[i].node);
  auto dist = [&](std::size_t i, std::size_t j) {
    return norm2(periodic_displacement(g, pos[i], pos[j]));
  };

  Structured out;
  out.nodes.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    BubbleNode& b = out.nodes[j];
    b.center = pos[j];
    b.center_node = cands[j].node;
    b.lambda = cands[j].lambda;
    int parent = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j || !(cands[i].lambda > cands[j].lambda)) continue;
      if (dist(i, j) > cands[i].r_det) continue;
      if (parent < 0 || cands[i].lambda < cands[parent].lambda) parent = static_cast<int>(i);
    }
    b.parent = parent;
  }
  for (std::size_t j = 0; j < m; ++j) {
    int d = 1;
    for (int p = out.nodes[j].parent; p >= 0; p = out.nodes[p].parent) {
      ++d;
      if (d > opt.max_depth) throw DomainError("bubble tree exceeded depth cap");
    }
    out.nodes[j].depth = d;
    if (out.nodes[j].parent >= 0) out.nodes[out.nodes[j].parent].children.push_back(static_cast<int>(j));
  }
  for (std::size_t j = 0; j < m; ++j) {
    BubbleNode& b = out.nodes[j];
    double eps = g.R_M;
    for (std::size_t i = 0; i < m; ++i)
      if (i != j && out.nodes[i].parent == b.parent) eps = std::min(eps, 0.5 * dist(i, j));
    if (b.parent >= 0) eps = std::min(eps, 0.5 * dist(j, b.parent));
    b.neck_outer = eps;
  }

  // Children before parents: ascending scale.
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cands[a].lambda < cands[b].lambda; });
  for (std::size_t j : order) {
    BubbleNode& b = out.nodes[j];
    std::vector<Vec2> ex_c;
    std::vector<double> ex_r;
    for (int c : b.children) {
      ex_c.push_back(out.nodes[c].center);
      ex_r.push_back(out.nodes[c].neck_outer);
    }
    try {
      b.lambda_cut = lambda_by_energy(g, e, b.center_node, b.neck_outer, C_R, ex_c, ex_r);
    } catch (const DomainError&) {
      out.ghosts.push_back(j);
      continue;
    }
    b.neck_inner = std::min(opt.neck_factor * b.lambda_cut, 0.5 * (b.lambda_cut + b.neck_outer));
    if (!(b.neck_inner < b.neck_outer) || !(b.neck_inner > 0.0))
      throw DomainError("degenerate neck annulus at bubble " + std::to_string(j));

    const DiskStencil st = disk_stencil(g, b.neck_outer);
    double neck = 0.0;
    for (std::size_t i = 0; i < st.offsets.size(); ++i) {
      const double r = std::sqrt(st.dist2[i]);
      if (r <= b.neck_inner) continue;
      const Vec2 x{b.center[0] + st.offsets[i][0] * g.h(), b.center[1] + st.offsets[i][1] * g.h()};
      bool skip = false;
      for (std::size_t c = 0; c < ex_c.size() && !skip; ++c)
        skip = norm2(periodic_displacement(g, x, ex_c[c])) <= ex_r[c];
      if (!skip)
        neck += e[g.index(g.ix_of(b.center_node) + st.offsets[i][0],
                          g.iy_of(b.center_node) + st.offsets[i][1])];
    }
    b.neck_energy = neck * h2;

    const double radius_units =
        std::max(opt.zoom_radius_units, 1.0625 * b.neck_inner / b.lambda);
    b.chart = make_chart(field, b.center, b.lambda, radius_units, opt.chart_n);
    std::vector<Vec2> chart_c;
    std::vector<double> chart_r;
    for (std::size_t c = 0; c < ex_c.size(); ++c) {
      const Vec2 d = periodic_displacement(g, ex_c[c], b.center);
      chart_c.push_back({d[0] / b.lambda, d[1] / b.lambda});
      chart_r.push_back(ex_r[c] / b.lambda);
    }
    b.bubble_energy = b.chart.disk_energy(b.neck_inner / b.lambda, chart_c, chart_r);
    if (b.bubble_energy < 0.5 * epsilon_1) out.ghosts.push_back(j);
    b.p = circle_mean(field, b.center, b.neck_outer);
    b.q = circle_mean(field, b.center, b.neck_inner);
  }
  return out;
}

}  // namespace

BubbleTree build_tree(const MapField& field, double epsilon_1, double C_R,
                      const TreeOptions& options) {
  if (!(epsilon_1 > 0.0)) throw DomainError("epsilon_1 must be positive");
  if (C_R < 0.0) throw DomainError("C_R must be nonnegative");
  const TorusGrid& g = field.grid;
  const double h2 = g.h() * g.h();
  const std::vector<double> e = energy_density(field);
  BubbleTree tree;
  tree.epsilon_1 = epsilon_1;
  tree.C_R = C_R;
  for (double v : e) tree.total_energy_in += v;
  tree.total_energy_in *= h2;

  std::vector<Candidate> cands = detect_candidates(field, e, epsilon_1, options);
  Structured s;
  for (;;) {
    s = structure(field, e, cands, epsilon_1, C_R, options);
    if (s.ghosts.empty()) break;
    std::sort(s.ghosts.begin(), s.ghosts.end());
    for (auto it = s.ghosts.rbegin(); it != s.ghosts.rend(); ++it)
      cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(*it));
  }
  tree.nodes = std::move(s.nodes);

  tree.root = field;
  std::vector<char> covered(g.size(), 0);
  for (const BubbleNode& b : tree.nodes) {
    if (b.parent >= 0) continue;
    const DiskStencil st = disk_stencil(g, b.neck_outer);
    for (const auto& o : st.offsets) {
      const std::size_t n = g.index(g.ix_of(b.center_node) + o[0], g.iy_of(b.center_node) + o[1]);
      covered[n] = 1;
      std::copy(b.p.begin(), b.p.end(), tree.root.at(n).begin());
    }
  }
  for (std::size_t n = 0; n < g.size(); ++n)
    if (!covered[n]) tree.body_energy += e[n];
  tree.body_energy *= h2;
  tree.identity_residual = tree.total_energy_in - tree.body_energy;
  for (const BubbleNode& b : tree.nodes) tree.identity_residual -= b.bubble_energy + b.neck_energy;
  return tree;
}

}  // namespace suflow
