#include <algorithm>
#include <cmath>
#include <vector>

#include "suflow/kernels.hpp"

namespace suflow::kernels::omp {

namespace {

// Neighbor offsets for a node row, resolved once per row so the inner loop
// carries no modulo arithmetic.
struct RowNeighbors {
  std::size_t self, up, down;  // row starts (node index of ix = 0)
};

inline RowNeighbors row_neighbors(const View& v, int iy) {
  const int up = iy + 1 == v.n ? 0 : iy + 1;
  const int dn = iy == 0 ? v.n - 1 : iy - 1;
  return {static_cast<std::size_t>(iy) * v.n, static_cast<std::size_t>(up) * v.n,
          static_cast<std::size_t>(dn) * v.n};
}

inline int xp(const View& v, int ix) { return ix + 1 == v.n ? 0 : ix + 1; }
inline int xm(const View& v, int ix) { return ix == 0 ? v.n - 1 : ix - 1; }

template <int K>
inline double dist2(const double* a, const double* b, int kdyn) {
  const int k = K > 0 ? K : kdyn;
  double s = 0.0;
  for (int c = 0; c < k; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

template <int K>
DensitySums density_impl(View v, const double* u, double alpha, double r2, double* e,
                         double* w) {
  const int k = K > 0 ? K : v.k;
  const double inv_h2 = 1.0 / (v.h * v.h);
  const double am1 = alpha - 1.0;
  const bool same_r = r2 == 1.0;
  std::vector<DensitySums> rows(v.n);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < v.n; ++iy) {
    const RowNeighbors r = row_neighbors(v, iy);
    DensitySums acc;
    acc.sup_e = -1.0;
    // Horizontal edge term of node ix-1 -> ix, reused as the backward term.
    double back = dist2<K>(u + (r.self + v.n - 1) * k, u + r.self * k, k);
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = r.self + ix;
      const double* um = u + m * k;
      const double fwd = dist2<K>(u + (r.self + xp(v, ix)) * k, um, k);
      const double s = fwd + back + dist2<K>(u + (r.up + ix) * k, um, k) +
                       dist2<K>(um, u + (r.down + ix) * k, k);
      back = fwd;
      const double em = 0.5 * s * inv_h2;
      const double wm = std::pow(r2 + em, am1);
      e[m] = em;
      w[m] = wm;
      const double ea = (r2 + em) * wm;
      acc.e += em;
      acc.e_alpha_r += ea;
      acc.e_alpha_one += same_r ? ea : std::pow(1.0 + em, alpha);
      if (em > acc.sup_e) {
        acc.sup_e = em;
        acc.argmax = m;
      }
    }
    rows[iy] = acc;
  }
  DensitySums out = rows[0];
  for (int iy = 1; iy < v.n; ++iy) {
    out.e += rows[iy].e;
    out.e_alpha_r += rows[iy].e_alpha_r;
    out.e_alpha_one += rows[iy].e_alpha_one;
    if (rows[iy].sup_e > out.sup_e) {
      out.sup_e = rows[iy].sup_e;
      out.argmax = rows[iy].argmax;
    }
  }
  return out;
}

template <int K>
double rhs_impl(View v, const double* u, const double* w, double* out) {
  const int k = K > 0 ? K : v.k;
  const double inv_h2 = 1.0 / (v.h * v.h);
  std::vector<double> rows(v.n);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < v.n; ++iy) {
    const RowNeighbors r = row_neighbors(v, iy);
    double acc[K > 0 ? K : 16];
    std::vector<double> dyn(K > 0 ? 0 : k);
    double* a = K > 0 ? acc : dyn.data();
    double row = 0.0;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = r.self + ix;
      const std::size_t nb[4] = {r.self + xp(v, ix), r.self + xm(v, ix), r.up + ix,
                                 r.down + ix};
      const double wm = w[m];
      const double* um = u + m * k;
      for (int c = 0; c < k; ++c) a[c] = 0.0;
      for (std::size_t j : nb) {
        const double wbar = 0.5 * (wm + w[j]);
        const double* uj = u + j * k;
        for (int c = 0; c < k; ++c) a[c] += wbar * (uj[c] - um[c]);
      }
      const double scale = inv_h2 / wm;
      double normal = 0.0;
      for (int c = 0; c < k; ++c) {
        a[c] *= scale;
        normal += a[c] * um[c];
      }
      double* o = out + m * k;
      for (int c = 0; c < k; ++c) {
        o[c] = a[c] - normal * um[c];
        row += o[c] * o[c];
      }
    }
    rows[iy] = row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

template <int K>
UpdateSums update_impl(View v, const double* u, const double* dir, double dt, const double* w,
                       double* u_new) {
  const int k = K > 0 ? K : v.k;
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<UpdateSums> rows(v.n);
  const double inv_dt2 = 1.0 / (dt * dt);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < v.n; ++iy) {
    UpdateSums acc;
    const std::size_t base = static_cast<std::size_t>(iy) * v.n;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = base + ix;
      const double* um = u + m * k;
      const double* dm = dir + m * k;
      double* nm = u_new + m * k;
      double n2 = 0.0;
      for (int c = 0; c < k; ++c) {
        nm[c] = um[c] + dt * dm[c];
        n2 += nm[c] * nm[c];
      }
      const double nrm = std::sqrt(n2);
      if (!std::isfinite(nrm) || nrm < 1e-6) {
        if (acc.bad_node == none) acc.bad_node = m;
        continue;
      }
      const double inv = 1.0 / nrm;
      double d2 = 0.0;
      for (int c = 0; c < k; ++c) {
        nm[c] *= inv;
        const double d = nm[c] - um[c];
        d2 += d * d;
      }
      acc.weighted_speed2 += w[m] * d2 * inv_dt2;
      acc.max_displacement = std::max(acc.max_displacement, std::sqrt(d2));
    }
    rows[iy] = acc;
  }
  UpdateSums out;
  for (const UpdateSums& r : rows) {
    if (r.bad_node != none && out.bad_node == none) out.bad_node = r.bad_node;
    out.weighted_speed2 += r.weighted_speed2;
    out.max_displacement = std::max(out.max_displacement, r.max_displacement);
  }
  return out;
}

template <int K>
void gradient_impl(View v, const double* u, double* gx, double* gy) {
  const int k = K > 0 ? K : v.k;
  const double inv_2h = 0.5 / v.h;
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < v.n; ++iy) {
    const RowNeighbors r = row_neighbors(v, iy);
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = r.self + ix;
      const double* a = u + (r.self + xp(v, ix)) * k;
      const double* b = u + (r.self + xm(v, ix)) * k;
      const double* c_ = u + (r.up + ix) * k;
      const double* d = u + (r.down + ix) * k;
      for (int c = 0; c < k; ++c) {
        gx[m * k + c] = (a[c] - b[c]) * inv_2h;
        gy[m * k + c] = (c_[c] - d[c]) * inv_2h;
      }
    }
  }
}

}  // namespace

DensitySums density(View v, const double* u, double alpha, double r2, double* e, double* w) {
  return v.k == 3 ? density_impl<3>(v, u, alpha, r2, e, w)
                  : density_impl<0>(v, u, alpha, r2, e, w);
}

double alpha_rhs(View v, const double* u, const double* w, double* out) {
  return v.k == 3 ? rhs_impl<3>(v, u, w, out) : rhs_impl<0>(v, u, w, out);
}

UpdateSums update(View v, const double* u, const double* dir, double dt, const double* w,
                  double* u_new) {
  return v.k == 3 ? update_impl<3>(v, u, dir, dt, w, u_new)
                  : update_impl<0>(v, u, dir, dt, w, u_new);
}

void central_gradient(View v, const double* u, double* gx, double* gy) {
  if (v.k == 3)
    gradient_impl<3>(v, u, gx, gy);
  else
    gradient_impl<0>(v, u, gx, gy);
}

double degree_sum(View v, const double* u) {
  const double inv_2h = 0.5 / v.h;
  std::vector<double> rows(v.n);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < v.n; ++iy) {
    const RowNeighbors r = row_neighbors(v, iy);
    double row = 0.0;
    for (int ix = 0; ix < v.n; ++ix) {
      const double* p = u + (r.self + ix) * 3;
      const double* xa = u + (r.self + xp(v, ix)) * 3;
      const double* xb = u + (r.self + xm(v, ix)) * 3;
      const double* ya = u + (r.up + ix) * 3;
      const double* yb = u + (r.down + ix) * 3;
      double a[3], b[3];
      for (int c = 0; c < 3; ++c) {
        a[c] = (xa[c] - xb[c]) * inv_2h;
        b[c] = (ya[c] - yb[c]) * inv_2h;
      }
      row += p[0] * (a[1] * b[2] - a[2] * b[1]) + p[1] * (a[2] * b[0] - a[0] * b[2]) +
             p[2] * (a[0] * b[1] - a[1] * b[0]);
    }
    rows[iy] = row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

}  // namespace suflow::kernels::omp
