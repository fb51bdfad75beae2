#include "suflow/flow.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "suflow/errors.hpp"

namespace suflow {

void FlowParams::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ConfigError("alpha must lie in (1, 2], got " + std::to_string(alpha));
  if (!(r_scale > 0.0) || !std::isfinite(r_scale))
    throw ConfigError("r_scale must be positive");
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0))
    throw ConfigError("cfl_factor must lie in (0, 1]");
  if (!(tau_tolerance > 0.0)) throw ConfigError("tau_tolerance must be positive");
  if (blowup_sup_e && !(*blowup_sup_e > 0.0))
    throw ConfigError("blowup_sup_e must be positive");
}

double FlowParams::sup_e_cap(const TorusGrid& grid) const {
  if (blowup_sup_e) return *blowup_sup_e;
  const double h = grid.h();
  return 1e6 / (h * h);
}

kernels::View view_of(const MapField& field) {
  return {field.grid.nx, field.k, field.grid.h()};
}

Gradient gradient(const MapField& field) {
  Gradient g;
  g.dx.resize(field.values.size());
  g.dy.resize(field.values.size());
  kernels::omp::central_gradient(view_of(field), field.values.data(), g.dx.data(), g.dy.data());
  return g;
}

std::vector<double> energy_density(const MapField& field) {
  std::vector<double> e(field.nodes()), w(field.nodes());
  kernels::omp::density(view_of(field), field.values.data(), 1.0 + 1e-9, 1.0, e.data(),
                        w.data());
  return e;
}

std::vector<double> rhs(const MapField& field, const FlowParams& params) {
  return tension_alpha(field, params).field;
}

Tension tension_alpha(const MapField& field, const FlowParams& params) {
  params.validate();
  const kernels::View v = view_of(field);
  std::vector<double> e(field.nodes()), w(field.nodes());
  kernels::omp::density(v, field.values.data(), params.alpha,
                        params.r_scale * params.r_scale, e.data(), w.data());
  Tension t;
  t.field.resize(field.values.size());
  const double s = kernels::omp::alpha_rhs(v, field.values.data(), w.data(), t.field.data());
  t.l2_norm = std::sqrt(s * v.h * v.h);
  return t;
}

double stable_dt(const TorusGrid& grid, const FlowParams& params) {
  const double h = grid.h();
  return params.cfl_factor * h * h / (4.0 * (1.0 + 2.0 * (params.alpha - 1.0)));
}

double stable_dt(const MapField& field, const FlowParams& params) {
  return stable_dt(field.grid, params);
}

FlowState step(const FlowState& state, const FlowParams& params) {
  Stepper s(state, params);
  s.advance(stable_dt(state.field, params));
  return s.state();
}

double degree_real(const MapField& field) {
  if (field.k != 3) throw DomainError("degree requires 3-dimensional ambient target");
  const kernels::View v = view_of(field);
  return kernels::omp::degree_sum(v, field.values.data()) * v.h * v.h /
         (4.0 * std::numbers::pi);
}

Stepper::Stepper(FlowState state, const FlowParams& params, std::optional<double> energy_ref)
    : state_(std::move(state)), params_(params) {
  params_.validate();
  state_.field.grid.validate();
  view_ = view_of(state_.field);
  r2_ = params_.r_scale * params_.r_scale;
  const std::size_t n = state_.field.nodes();
  e_.resize(n);
  w_.resize(n);
  e_next_.resize(n);
  w_next_.resize(n);
  rhs_.resize(state_.field.values.size());
  u_next_.resize(state_.field.values.size());
  refresh_density();
  energy_ref_ = energy_ref ? *energy_ref : sums_.e_alpha_r * view_.h * view_.h;
}

void Stepper::refresh_density() {
  sums_ = kernels::omp::density(view_, state_.field.values.data(), params_.alpha, r2_,
                                e_.data(), w_.data());
  rhs_valid_ = false;
}

void Stepper::ensure_rhs() {
  if (rhs_valid_) return;
  rhs_sum2_ = kernels::omp::alpha_rhs(view_, state_.field.values.data(), w_.data(), rhs_.data());
  rhs_valid_ = true;
}

double Stepper::tau_norm() {
  ensure_rhs();
  return std::sqrt(rhs_sum2_ * view_.h * view_.h);
}

const std::vector<double>& Stepper::current_rhs() {
  ensure_rhs();
  return rhs_;
}

double Stepper::try_step(double dt, std::vector<double>& u_new,
                         kernels::DensitySums& new_sums) {
  const double* u = state_.field.values.data();
  kernels::UpdateSums upd;
  if (params_.integrator == Integrator::euler) {
    upd = kernels::omp::update(view_, u, rhs_.data(), dt, w_.data(), u_new.data());
  } else {
    if (u_half_.empty()) {
      u_half_.resize(u_new.size());
      rhs_half_.resize(u_new.size());
      e_half_.resize(e_.size());
      w_half_.resize(w_.size());
    }
    upd = kernels::omp::update(view_, u, rhs_.data(), 0.5 * dt, w_.data(), u_half_.data());
    if (upd.ok()) {
      kernels::omp::density(view_, u_half_.data(), params_.alpha, r2_, e_half_.data(),
                            w_half_.data());
      kernels::omp::alpha_rhs(view_, u_half_.data(), w_half_.data(), rhs_half_.data());
      upd = kernels::omp::update(view_, u, rhs_half_.data(), dt, w_half_.data(), u_new.data());
    }
  }
  if (!upd.ok())
    throw NumericalError("numerical blow-up at node " + std::to_string(upd.bad_node),
                         upd.bad_node);
  new_sums = kernels::omp::density(view_, u_new.data(), params_.alpha, r2_, e_next_.data(),
                                   w_next_.data());
  if (!std::isfinite(new_sums.e_alpha_r))
    throw NumericalError("numerical blow-up at node " + std::to_string(new_sums.argmax),
                         new_sums.argmax);
  return 2.0 * params_.alpha * dt * upd.weighted_speed2 * view_.h * view_.h;
}

double Stepper::advance(double dt) {
  ensure_rhs();
  const double h2 = view_.h * view_.h;
  const double e_old = sums_.e_alpha_r * h2;
  const double slack = 1e-10 * energy_ref_;
  kernels::DensitySums new_sums;
  double taken = dt;
  for (int attempt = 0;; ++attempt) {
    const double diss = try_step(taken, u_next_, new_sums);
    if (new_sums.e_alpha_r * h2 <= e_old + slack) {
      state_.field.values.swap(u_next_);
      std::swap(e_, e_next_);
      std::swap(w_, w_next_);
      sums_ = new_sums;
      rhs_valid_ = false;
      state_.t += taken;
      state_.step_count += 1;
      state_.cumulative_dissipation += diss;
      return taken;
    }
    if (attempt == 5)
      throw NumericalError("alpha-energy increased after 5 step halvings", new_sums.argmax);
    taken *= 0.5;
    ++halvings_;
  }
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::time_exhausted: return "time_exhausted";
    case StopReason::concentration_event: return "concentration_event";
    case StopReason::blow_up: return "blow_up";
  }
  return "unknown";
}

const Snapshot* FlowRun::snapshot_at(double t, double tol) const {
  for (const Snapshot& s : snapshots)
    if (std::abs(s.t - t) <= tol * (1.0 + std::abs(t))) return &s;
  return nullptr;
}

FlowRun run(const FlowState& initial, const FlowParams& params, const StopRule& stop,
            const RunOptions& options) {
  if (options.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  FlowRun out;
  out.params = params;
  Stepper st(initial, params);
  const double h2 = st.state().field.grid.h() * st.state().field.grid.h();
  const double dt0 = stable_dt(initial.field, params);
  const double cap = stop.sup_e_above ? *stop.sup_e_above : params.sup_e_cap(initial.field.grid);
  const bool track_degree = options.track_degree && initial.field.k == 3;
  out.E0 = st.sums().e_alpha_one * h2;
  const std::int64_t first_step = initial.step_count;
  bool last_recorded = false;

  for (;;) {
    const FlowState& s = st.state();
    SeriesRow row;
    row.step = s.step_count;
    row.t = s.t;
    row.E = st.sums().e * h2;
    row.E_alpha = st.sums().e_alpha_one * h2;
    row.E_alpha_r = st.sums().e_alpha_r * h2;
    row.dissipation = s.cumulative_dissipation;
    row.sup_e = st.sums().sup_e;
    row.tau_norm = st.tau_norm();
    if (track_degree) {
      row.degree_real = degree_real(s.field);
      row.degree_int = std::lround(row.degree_real);
    }
    out.series.push_back(row);
    last_recorded = (s.step_count - first_step) % options.snapshot_stride == 0;
    if (last_recorded) out.snapshots.push_back({s.step_count, s.t, s.field});

    if (stop.tau_below && row.tau_norm <= *stop.tau_below) {
      out.reason = StopReason::converged;
      break;
    }
    if (stop.t_max && s.t >= *stop.t_max * (1.0 - 1e-12)) {
      out.reason = StopReason::time_exhausted;
      break;
    }
    if (row.sup_e > cap) {
      out.reason = StopReason::concentration_event;
      out.message = "sup_e " + std::to_string(row.sup_e) + " exceeded cap";
      break;
    }
    if (s.step_count - first_step >= stop.max_steps) {
      out.reason = StopReason::time_exhausted;
      out.message = "step budget exhausted";
      break;
    }
    double dt = dt0;
    if (stop.t_max) dt = std::min(dt, *stop.t_max - s.t);
    try {
      st.advance(dt);
    } catch (const NumericalError& err) {
      out.reason = StopReason::blow_up;
      out.message = err.what();
      out.blowup_node = err.node();
      break;
    }
  }
  if (!last_recorded) {
    const FlowState& s = st.state();
    out.snapshots.push_back({s.step_count, s.t, s.field});
  }
  out.final_state = st.state();
  out.halvings = st.halvings();
  return out;
}

}  // namespace suflow
