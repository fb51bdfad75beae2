#include <cmath>
#include <numbers>
#include <string>

#include "suflow/errors.hpp"
#include "suflow/surgery.hpp"

namespace suflow {

CylinderMap::CylinderMap(int nt, int nr, double r0, double r1, int kk)
    : n_theta(nt), n_rho(nr), rho0(r0), rho1(r1), k(kk),
      values(static_cast<std::size_t>(nt) * nr * kk, 0.0) {
  if (nt < 3 || nr < 2) throw DomainError("cylinder needs n_theta >= 3 and n_rho >= 2");
  if (!(r1 > r0)) throw DomainError("cylinder needs rho1 > rho0");
}

double CylinderMap::d_theta() const { return 2.0 * std::numbers::pi / n_theta; }

std::span<double> CylinderMap::at(int i, int j) {
  return {values.data() + (static_cast<std::size_t>(j) * n_theta + i) * k,
          static_cast<std::size_t>(k)};
}

std::span<const double> CylinderMap::at(int i, int j) const {
  return {values.data() + (static_cast<std::size_t>(j) * n_theta + i) * k,
          static_cast<std::size_t>(k)};
}

double CylinderMap::energy() const {
  const double dt = d_theta(), dr = d_rho();
  double total = 0.0;
  for (int j = 0; j + 1 < n_rho; ++j)
    for (int i = 0; i < n_theta; ++i) {
      const int ip = i + 1 == n_theta ? 0 : i + 1;
      const auto a = at(i, j), b = at(ip, j), c = at(i, j + 1), d = at(ip, j + 1);
      double ur = 0.0, ut = 0.0;
      for (int m = 0; m < k; ++m) {
        const double r = 0.5 * ((c[m] - a[m]) + (d[m] - b[m])) / dr;
        const double t = 0.5 * ((b[m] - a[m]) + (d[m] - c[m])) / dt;
        ur += r * r;
        ut += t * t;
      }
      total += (ur + ut) * dr * dt;
    }
  return total;
}

CylinderMap cone_extension(const std::vector<std::vector<double>>& loop,
                           std::span<const double> p, ConeDirection direction, int n_r) {
  const int nt = static_cast<int>(loop.size());
  const int k = static_cast<int>(p.size());
  std::vector<std::vector<double>> logs(nt);
  for (int i = 0; i < nt; ++i) {
    if (sphere::distance(p, loop[i]) > 0.5 * std::numbers::pi + 1e-12)
      throw DomainError("cone loop leaves the hemisphere around its cone point");
    logs[i] = sphere::log_point(p, loop[i]);
  }
  CylinderMap cyl(nt, n_r, 0.0, std::log(2.0), k);
  std::vector<double> v(k);
  for (int j = 0; j < n_r; ++j) {
    const double r = std::exp(cyl.rho(j));
    const double s = direction == ConeDirection::inward ? 2.0 - r : r - 1.0;
    for (int i = 0; i < nt; ++i) {
      for (int c = 0; c < k; ++c) v[c] = s * logs[i][c];
      sphere::exp_point_into(p, v, cyl.at(i, j));
    }
  }
  // The loop is reproduced exactly on its own trace circle.
  const int j_loop = direction == ConeDirection::inward ? 0 : n_r - 1;
  for (int i = 0; i < nt; ++i)
    std::copy(loop[i].begin(), loop[i].end(), cyl.at(i, j_loop).begin());
  return cyl;
}

CylinderMap squeeze_map(const CylinderMap& cyl, double shift) {
  const double K = cyl.length();
  if (!(K > 4.0 * shift)) throw DomainError("neck too short to squeeze");
  CylinderMap out = cyl;
  out.rho0 = cyl.rho0 + shift;
  out.rho1 = cyl.rho1 - shift;
  return out;
}

void NeckSpec::validate() const {
  if (p.size() != q.size() || p.empty()) throw DomainError("neck endpoints have mismatched size");
  if (!(a > 0.0) || !(b > a)) throw DomainError("neck radii must satisfy 0 < a < b");
  if (b / a < std::exp(1.0) * (1.0 - 1e-12)) throw DomainError("neck needs b/a >= e");
  if (sphere::dot(p, q) <= -1.0 + 1e-8) throw DomainError("antipodal neck endpoints");
}

CylinderMap geodesic_neck(const NeckSpec& spec, int n_theta, int n_rho) {
  spec.validate();
  const int k = static_cast<int>(spec.p.size());
  CylinderMap cyl(n_theta, n_rho, std::log(spec.a), std::log(spec.b), k);
  for (int j = 0; j < n_rho; ++j) {
    const double s = static_cast<double>(j) / (n_rho - 1);
    const std::vector<double> g = sphere::geodesic(spec.q, spec.p, s);
    for (int i = 0; i < n_theta; ++i) std::copy(g.begin(), g.end(), cyl.at(i, j).begin());
  }
  return cyl;
}

}  // namespace suflow
