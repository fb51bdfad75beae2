#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "suflow/geometry.hpp"
#include "suflow/kernels.hpp"

namespace suflow {

enum class Integrator { euler, rk2 };

struct FlowParams {
  double alpha = 1.1;
  double r_scale = 1.0;
  double cfl_factor = 0.2;
  Integrator integrator = Integrator::euler;
  double tau_tolerance = 1e-5;
  // Density cap for concentration events; unset means 1e6 / h^2.
  std::optional<double> blowup_sup_e;

  void validate() const;
  double sup_e_cap(const TorusGrid& grid) const;
};

struct FlowState {
  double t = 0.0;
  MapField field;
  std::int64_t step_count = 0;
  double cumulative_dissipation = 0.0;
};

struct Gradient {
  std::vector<double> dx;  // node-major, k components per node
  std::vector<double> dy;
};

Gradient gradient(const MapField& field);
std::vector<double> energy_density(const MapField& field);
std::vector<double> rhs(const MapField& field, const FlowParams& params);
double stable_dt(const TorusGrid& grid, const FlowParams& params);
double stable_dt(const MapField& field, const FlowParams& params);
FlowState step(const FlowState& state, const FlowParams& params);

struct Tension {
  std::vector<double> field;
  double l2_norm = 0.0;
};
Tension tension_alpha(const MapField& field, const FlowParams& params);

// Real-valued degree (1/4pi) sum u . (u_x x u_y) h^2; requires k = 3.
double degree_real(const MapField& field);

kernels::View view_of(const MapField& field);

// Explicit integrator that owns its work buffers and caches the density and
// rhs of the current state, so each accepted step evaluates them once.
class Stepper {
 public:
  Stepper(FlowState state, const FlowParams& params, std::optional<double> energy_ref = {});

  const FlowState& state() const { return state_; }
  const FlowParams& params() const { return params_; }
  // Density sums of the current state (sums are not multiplied by h^2).
  const kernels::DensitySums& sums() const { return sums_; }
  const std::vector<double>& density() const { return e_; }
  double energy_ref() const { return energy_ref_; }
  // ||tau_alpha||_{L^2} of the current state.
  double tau_norm();
  const std::vector<double>& current_rhs();
  // Advances by dt, halving it at most 5 times if E_alpha would increase by
  // more than 1e-10 * energy_ref. Returns the step actually taken.
  double advance(double dt);
  int halvings() const { return halvings_; }

 private:
  void refresh_density();
  void ensure_rhs();
  double try_step(double dt, std::vector<double>& u_new, kernels::DensitySums& new_sums);

  FlowState state_;
  FlowParams params_;
  kernels::View view_;
  double r2_ = 1.0;
  double energy_ref_ = 0.0;
  int halvings_ = 0;
  bool rhs_valid_ = false;
  double rhs_sum2_ = 0.0;
  kernels::DensitySums sums_;
  std::vector<double> e_, w_, rhs_;
  std::vector<double> u_next_, e_next_, w_next_;
  std::vector<double> u_half_, e_half_, w_half_, rhs_half_;
};

enum class StopReason { converged, time_exhausted, concentration_event, blow_up };
const char* to_string(StopReason reason);

struct StopRule {
  std::optional<double> t_max;
  std::optional<double> tau_below;
  std::optional<double> sup_e_above;
  std::int64_t max_steps = 50'000'000;
};

struct SeriesRow {
  std::int64_t step = 0;
  double t = 0.0;
  double E = 0.0;
  double E_alpha = 0.0;    // sum (1 + e)^alpha h^2
  double E_alpha_r = 0.0;  // sum (r^2 + e)^alpha h^2, the dissipated functional
  double dissipation = 0.0;
  double sup_e = 0.0;
  double degree_real = 0.0;
  long degree_int = 0;
  double tau_norm = 0.0;
};

struct Snapshot {
  std::int64_t step = 0;
  double t = 0.0;
  MapField field;
};

struct FlowRun {
  FlowParams params;
  std::vector<Snapshot> snapshots;
  std::vector<SeriesRow> series;
  StopReason reason = StopReason::time_exhausted;
  std::string message;
  std::size_t blowup_node = static_cast<std::size_t>(-1);
  FlowState final_state;
  double E0 = 0.0;  // E_alpha of the initial state
  int halvings = 0;

  const Snapshot* snapshot_at(double t, double tol = 1e-12) const;
};

struct RunOptions {
  int snapshot_stride = 1;
  bool track_degree = true;
};

FlowRun run(const FlowState& initial, const FlowParams& params, const StopRule& stop,
            const RunOptions& options);

}  // namespace suflow
