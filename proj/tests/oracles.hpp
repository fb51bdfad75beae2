#pragma once

// Independent reference values computed without the library's stencils.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// Dirichlet energy of the equivariant map with polar angle f(r) from the
// north pole: 2 pi int (f'^2 + sin^2 f / r^2) r dr.
inline double equivariant_energy(const std::function<double(double)>& f, double r_max) {
  auto integrand = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double dr = 1e-6 * std::max(r, 1e-3);
    const double fp = (f(r + dr) - f(r - dr)) / (2.0 * dr);
    const double sf = std::sin(f(r));
    return (fp * fp + sf * sf / (r * r)) * r;
  };
  return 2.0 * kPi * simpson(integrand, 0.0, r_max, 200000);
}

// Polar angle of the glued bubble of scale s, cut off over [r_out/2, r_out].
inline double glued_profile(double r, double s, double r_out) {
  const double f = 2.0 * std::atan2(s, r);
  if (r <= 0.5 * r_out) return f;
  return f * smoothstep5((r_out - r) / (0.5 * r_out));
}

// Psi of a constant map for a cutoff phi(r): rho^(2a-2) int_{rho^2}^{4 rho^2}
// int_R^2 exp(-r^2 / 4 tau) / tau phi(r)^2 dx dtau.
inline double constant_psi(double rho, double alpha, const std::function<double(double)>& phi,
                           double r_max) {
  auto inner = [&](double tau) {
    return simpson([&](double r) {
      const double p = phi(r);
      return 2.0 * kPi * r * std::exp(-r * r / (4.0 * tau)) / tau * p * p;
    }, 0.0, r_max, 4000);
  };
  return std::pow(rho, 2.0 * alpha - 2.0) * simpson(inner, rho * rho, 4.0 * rho * rho, 200);
}

}  // namespace oracle
