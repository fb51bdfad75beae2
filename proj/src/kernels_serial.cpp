#include <algorithm>
#include <cmath>
#include <vector>

#include "suflow/kernels.hpp"

namespace suflow::kernels::serial {

namespace {

std::size_t idx(const View& v, int ix, int iy) {
  ix = (ix % v.n + v.n) % v.n;
  iy = (iy % v.n + v.n) % v.n;
  return static_cast<std::size_t>(iy) * v.n + ix;
}

double diff2(const View& v, const double* u, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (int c = 0; c < v.k; ++c) {
    const double d = u[a * v.k + c] - u[b * v.k + c];
    s += d * d;
  }
  return s;
}

}  // namespace

DensitySums density(View v, const double* u, double alpha, double r2, double* e, double* w) {
  DensitySums out;
  const double inv_h2 = 1.0 / (v.h * v.h);
  for (int iy = 0; iy < v.n; ++iy) {
    DensitySums row;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = idx(v, ix, iy);
      const double s = diff2(v, u, idx(v, ix + 1, iy), m) + diff2(v, u, m, idx(v, ix - 1, iy)) +
                       diff2(v, u, idx(v, ix, iy + 1), m) + diff2(v, u, m, idx(v, ix, iy - 1));
      const double em = 0.5 * s * inv_h2;
      e[m] = em;
      w[m] = std::pow(r2 + em, alpha - 1.0);
      row.e += em;
      row.e_alpha_r += std::pow(r2 + em, alpha);
      row.e_alpha_one += std::pow(1.0 + em, alpha);
      if (ix == 0 || em > row.sup_e) {
        row.sup_e = em;
        row.argmax = m;
      }
    }
    out.e += row.e;
    out.e_alpha_r += row.e_alpha_r;
    out.e_alpha_one += row.e_alpha_one;
    if (iy == 0 || row.sup_e > out.sup_e) {
      out.sup_e = row.sup_e;
      out.argmax = row.argmax;
    }
  }
  return out;
}

double alpha_rhs(View v, const double* u, const double* w, double* out) {
  const double inv_h2 = 1.0 / (v.h * v.h);
  double total = 0.0;
  std::vector<double> acc(v.k);
  for (int iy = 0; iy < v.n; ++iy) {
    double row = 0.0;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = idx(v, ix, iy);
      const std::size_t nb[4] = {idx(v, ix + 1, iy), idx(v, ix - 1, iy), idx(v, ix, iy + 1),
                                 idx(v, ix, iy - 1)};
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j : nb) {
        const double wbar = 0.5 * (w[m] + w[j]);
        for (int c = 0; c < v.k; ++c) acc[c] += wbar * (u[j * v.k + c] - u[m * v.k + c]);
      }
      double normal = 0.0;
      for (int c = 0; c < v.k; ++c) {
        acc[c] *= inv_h2 / w[m];
        normal += acc[c] * u[m * v.k + c];
      }
      for (int c = 0; c < v.k; ++c) {
        out[m * v.k + c] = acc[c] - normal * u[m * v.k + c];
        row += out[m * v.k + c] * out[m * v.k + c];
      }
    }
    total += row;
  }
  return total;
}

UpdateSums update(View v, const double* u, const double* dir, double dt, const double* w,
                  double* u_new) {
  UpdateSums out;
  for (int iy = 0; iy < v.n; ++iy) {
    double row = 0.0;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = idx(v, ix, iy);
      double n2 = 0.0;
      for (int c = 0; c < v.k; ++c) {
        const double y = u[m * v.k + c] + dt * dir[m * v.k + c];
        u_new[m * v.k + c] = y;
        n2 += y * y;
      }
      const double nrm = std::sqrt(n2);
      if (!std::isfinite(nrm) || nrm < 1e-6) {
        out.bad_node = m;
        return out;
      }
      double d2 = 0.0;
      for (int c = 0; c < v.k; ++c) {
        u_new[m * v.k + c] /= nrm;
        const double d = u_new[m * v.k + c] - u[m * v.k + c];
        d2 += d * d;
      }
      row += w[m] * d2 / (dt * dt);
      out.max_displacement = std::max(out.max_displacement, std::sqrt(d2));
    }
    out.weighted_speed2 += row;
  }
  return out;
}

void central_gradient(View v, const double* u, double* gx, double* gy) {
  const double inv_2h = 0.5 / v.h;
  for (int iy = 0; iy < v.n; ++iy)
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = idx(v, ix, iy);
      const std::size_t xp = idx(v, ix + 1, iy), xm = idx(v, ix - 1, iy);
      const std::size_t yp = idx(v, ix, iy + 1), ym = idx(v, ix, iy - 1);
      for (int c = 0; c < v.k; ++c) {
        gx[m * v.k + c] = (u[xp * v.k + c] - u[xm * v.k + c]) * inv_2h;
        gy[m * v.k + c] = (u[yp * v.k + c] - u[ym * v.k + c]) * inv_2h;
      }
    }
}

double degree_sum(View v, const double* u) {
  std::vector<double> gx(v.nodes() * 3), gy(v.nodes() * 3);
  central_gradient(v, u, gx.data(), gy.data());
  double total = 0.0;
  for (int iy = 0; iy < v.n; ++iy) {
    double row = 0.0;
    for (int ix = 0; ix < v.n; ++ix) {
      const std::size_t m = idx(v, ix, iy);
      const double* a = gx.data() + 3 * m;
      const double* b = gy.data() + 3 * m;
      const double* p = u + 3 * m;
      row += p[0] * (a[1] * b[2] - a[2] * b[1]) + p[1] * (a[2] * b[0] - a[0] * b[2]) +
             p[2] * (a[0] * b[1] - a[1] * b[0]);
    }
    total += row;
  }
  return total;
}

}  // namespace suflow::kernels::serial
