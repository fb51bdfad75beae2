#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "suflow/bubbletree.hpp"
#include "suflow/geometry.hpp"

namespace suflow {

// Map on the flat cylinder S^1 x [rho0, rho1], sampled at theta_i = 2 pi i /
// n_theta and uniformly spaced rho_j including both ends. An annulus
// B_b \ B_a is the cylinder with rho = log r; the Dirichlet energy is
// conformally invariant, so energy() is also the annulus energy.
struct CylinderMap {
  int n_theta = 0;
  int n_rho = 0;
  double rho0 = 0.0;
  double rho1 = 0.0;
  int k = 3;
  std::vector<double> values;  // ((j * n_theta) + i) * k + c

  CylinderMap() = default;
  CylinderMap(int n_theta, int n_rho, double rho0, double rho1, int k);

  double length() const { return rho1 - rho0; }
  double d_rho() const { return (rho1 - rho0) / (n_rho - 1); }
  double d_theta() const;
  double rho(int j) const { return rho0 + j * d_rho(); }
  std::span<double> at(int i, int j);
  std::span<const double> at(int i, int j) const;
  // Cell-midpoint quadrature of int |u_theta|^2 + |u_rho|^2 dtheta drho.
  double energy() const;
};

enum class ConeDirection { inward, outward };

// Fills B_2 \ B_1 (rho = log r in [0, log 2]) from a loop f sampled at
// n_theta equally spaced angles: inward gives exp_p[(2 - r) log_p f(theta)],
// outward gives exp_p[(r - 1) log_p f(theta)].
CylinderMap cone_extension(const std::vector<std::vector<double>>& loop,
                           std::span<const double> p, ConeDirection direction, int n_r = 257);

// Conformal squeeze of S^1 x [0, K] onto S^1 x [shift, K - shift]: the same
// samples re-seated on the shorter cylinder. Requires K > 4 shift.
CylinderMap squeeze_map(const CylinderMap& cyl, double shift = 4.0);

struct NeckSpec {
  Vec2 center{0.0, 0.0};
  std::vector<double> p;  // outer end value
  std::vector<double> q;  // inner end value
  double a = 0.0;         // inner radius, 2 * lambda R
  double b = 0.0;         // outer radius, delta / 2
  double delta() const { return 2.0 * b; }
  double lambda_R() const { return 0.5 * a; }
  void validate() const;
};

// gamma((log r - log a) / (log b - log a)) on B_b \ B_a with gamma the
// minimal arc from q to p.
CylinderMap geodesic_neck(const NeckSpec& spec, int n_theta = 256, int n_rho = 512);

struct RegionEnergies {
  double kept = 0.0;
  double cones = 0.0;
  double geodesic = 0.0;
  double total() const { return kept + cones + geodesic; }
};

struct Competitor {
  MapField field;
  RegionEnergies energies;
  std::vector<char> surgery_mask;  // 1 on nodes inside some B_delta \ B_{lambda R}
};

// Replaces each neck B_delta \ B_{lambda R} by the two cones and the
// geodesic neck; every other node keeps its value bit for bit.
Competitor build_competitor(const MapField& field, const std::vector<NeckSpec>& specs);

struct ReferenceMaps {
  MapField w;        // squeezed map with cone and inversion collars
  MapField w_tilde;  // w with the geodesic neck on B_{delta/2} \ B_{2 lambda R}
};

// The squeeze uses log-radius shift log 4, which carries B_delta \ B_{lambda R}
// onto B_{delta/4} \ B_{4 lambda R} so the inversion collars meet it.
ReferenceMaps build_reference_map(const MapField& field, const std::vector<NeckSpec>& specs);

// Neck specs for every tree node whose annulus is long enough (b/a >= e).
std::vector<NeckSpec> neck_specs_from_tree(const BubbleTree& tree);

struct Closeness {
  bool close = false;
  double max_distance = 0.0;
};

// max over nodes of the geodesic distance, optionally restricted to nodes
// where mask is 0.
Closeness close_maps_homotopic(const MapField& f1, const MapField& f2, double sigma,
                               const std::vector<char>* exclude = nullptr);

}  // namespace suflow
