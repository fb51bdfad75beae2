#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "suflow/flow.hpp"
#include "suflow/geometry.hpp"

namespace suflow {

struct EnergyReport {
  double E = 0.0;
  double E_alpha = 0.0;
  double sup_e = 0.0;
  double tau_norm = 0.0;
  bool has_degree = false;
  double degree_real = 0.0;
  long degree_int = 0;
  double E0 = 0.0;
};

EnergyReport energy_report(const MapField& field, const FlowParams& params, double E0);

double dirichlet_energy(const MapField& field);
double alpha_energy(const MapField& field, double alpha);

struct Degree {
  double real = 0.0;
  long integer = 0;
};
Degree degree(const MapField& field);

// Grid points in the closed disk of the given radius around a node, as index
// offsets. Radius is measured in length units.
struct DiskStencil {
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> dist2;  // squared physical distance per offset
};
DiskStencil disk_stencil(const TorusGrid& grid, double radius);

// sum_{|x - c| <= radius} density(x) h^2 about a node center.
double ball_integral(const TorusGrid& grid, const std::vector<double>& density,
                     std::size_t center, double radius);

// Quintic smoothstep cutoff: 1 on [0, R_M/2], 0 beyond R_M.
double cutoff(double r, double R_M);

// Integral of e_alpha = (1 + e)^alpha over B_R(x) at t2, minus the same over
// B_2R(x) at t1, minus C_fit (t2 - t1) E0 / R^2.
double local_energy_residual(const FlowRun& run, std::size_t x, double R, double t1, double t2,
                             double C_fit);

struct MonotonicityProbe {
  std::size_t center = 0;
  double t0 = 0.0;
  std::vector<double> radii;
  std::vector<double> phi;  // cutoff per node
  std::vector<double> psi_values;

  static MonotonicityProbe make(const TorusGrid& grid, std::size_t center, double t0,
                                std::vector<double> radii);
};

// Psi^alpha_rho for every probe radius, by trapezoid quadrature over the run
// snapshots inside [t0 - 4 rho^2, t0 - rho^2]. Window end points that fall
// between snapshots are linearly interpolated from the bracketing samples.
std::vector<double> psi(const FlowRun& run, const MonotonicityProbe& probe, double alpha);

// max over r < rho of Psi_r - exp(c (rho - r)) Psi_rho - c E0 (rho - r).
double almost_monotonicity_check(const std::vector<double>& psi_values,
                                 const std::vector<double>& radii, double E0, double c_fit);

// Fitted constants are searched over this ladder; smallest passing is used.
inline constexpr std::array<double, 7> kFitLadder = {1, 2, 5, 10, 20, 50, 100};
std::optional<double> fit_constant(const std::function<bool(double)>& passes);

struct ConcentrationFlag {
  std::size_t node = 0;
  std::vector<double> ball_energies;  // per scale, same order as the report's scales
  double psi = 0.0;                   // Psi at the smallest scale, NaN if no coverage
  bool psi_confirms = false;
};

struct ConcentrationReport {
  double t = 0.0;
  double epsilon_0 = 1.0;
  std::vector<double> scales;
  std::vector<ConcentrationFlag> flagged;
  // One representative node per connected cluster of flagged nodes.
  std::vector<std::size_t> centers;
};

// Default scales: R_M, R_M/2, ... down to the last one not below 4h.
std::vector<double> default_scales(const TorusGrid& grid);

ConcentrationReport detect_concentration(const FlowRun& run, double t, double epsilon_0,
                                         std::vector<double> scales);
// Single-field variant (no Psi cross-check).
ConcentrationReport detect_concentration(const MapField& field, double epsilon_0,
                                         std::vector<double> scales);

struct BochnerReport {
  std::vector<double> residual;  // per node; NaN on excluded nodes
  double fraction_nonpositive = 0.0;
  std::size_t counted = 0;
};

// Residual of the Bochner inequality d_t e - div(a grad e) - C e(e+1) at the
// snapshot closest to t, using its two neighbours for the time derivative.
// Nodes within `margin` of the density maximum are excluded.
BochnerReport bochner_residual(const FlowRun& run, double t, double margin, double C_fit);

}  // namespace suflow
