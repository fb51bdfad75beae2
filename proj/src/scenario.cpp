#include "suflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "suflow/bubbletree.hpp"
#include "suflow/diagnostics.hpp"
#include "suflow/errors.hpp"
#include "suflow/initial_maps.hpp"
#include "suflow/report.hpp"
#include "suflow/surgery.hpp"

namespace suflow {

namespace fs = std::filesystem;
using nlohmann::json;

GoodSlice find_good_slice(const FlowRun& run, double horizon, int i) {
  if (!(horizon > 0.0)) throw DomainError("good slice needs a positive horizon");
  const auto& s = run.snapshots;
  if (s.empty() || s.back().t < horizon * (1.0 - 1e-9))
    throw DomainError("snapshots do not reach the end of the horizon");
  GoodSlice best;
  best.threshold = std::ldexp(1.0, -i);
  bool found = false;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double tn = s[j].t / horizon;
    if (tn < 0.5 - 1e-12) continue;
    const std::size_t a = j > 0 ? j - 1 : j;
    const std::size_t b = j + 1 < s.size() ? j + 1 : j;
    if (a == b) continue;
    const double dt = s[b].t - s[a].t;
    double sum = 0.0;
    const auto& ua = s[a].field.values;
    const auto& ub = s[b].field.values;
    for (std::size_t m = 0; m < ua.size(); ++m) {
      const double d = (ub[m] - ua[m]) / dt;
      sum += d * d;
    }
    const double h = s[j].field.grid.h();
    const double mass = sum * h * h;
    if (!found || mass < best.tension_mass) {
      best.tension_mass = mass;
      best.t0 = tn;
      best.t0_abs = s[j].t;
      best.snapshot_index = j;
      found = true;
    }
  }
  if (!found) throw DomainError("snapshots do not cover the window [1/2, 1]");
  best.clears = best.tension_mass <= best.threshold;
  return best;
}

namespace {

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", a);
  return buf;
}

struct Outputs {
  fs::path dir;
  ScenarioReport* report;
  void text(const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    write_text(p.string(), body);
    report->files.push_back(p.string());
  }
  void checkpoint(const std::string& name, const FlowState& s, const FlowParams& params) {
    const fs::path p = dir / name;
    write_checkpoint(p.string(), s, params);
    report->files.push_back(p.string());
  }
};

Outputs open_outputs(const ScenarioConfig& cfg, ScenarioReport& report) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("cannot create output_dir '" + cfg.output_dir + "': " + ec.message());
  return {fs::path(cfg.output_dir), &report};
}

double worst_energy_increase(const std::vector<SeriesRow>& rows) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i)
    worst = std::max(worst, rows[i].E_alpha_r - rows[i - 1].E_alpha_r);
  return rows.size() > 1 ? worst : 0.0;
}

json run_summary(const FlowRun& r) {
  json j;
  const SeriesRow& a = r.series.front();
  const SeriesRow& b = r.series.back();
  j["stop_reason"] = to_string(r.reason);
  if (!r.message.empty()) j["message"] = r.message;
  j["alpha"] = r.params.alpha;
  j["steps"] = b.step - a.step;
  j["t_final"] = b.t;
  j["E_initial"] = a.E;
  j["E_final"] = b.E;
  j["E_alpha_initial"] = a.E_alpha;
  j["E_alpha_final"] = b.E_alpha;
  j["tau_final"] = b.tau_norm;
  j["sup_e_final"] = b.sup_e;
  j["degree_initial"] = a.degree_int;
  j["degree_final"] = b.degree_int;
  j["degree_real_final"] = b.degree_real;
  j["cumulative_dissipation"] = b.dissipation;
  j["dissipation_identity_relative_error"] =
      std::abs(a.E_alpha_r - b.E_alpha_r - (b.dissipation - a.dissipation)) / a.E_alpha_r;
  j["worst_step_energy_increase_relative"] = worst_energy_increase(r.series) / a.E_alpha_r;
  j["step_halvings"] = r.halvings;
  j["snapshots"] = r.snapshots.size();
  return j;
}

ScenarioReport relax_like(const ScenarioConfig& cfg, const FlowState& initial,
                          const FlowParams& params) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  StopRule stop;
  stop.t_max = cfg.t_max;
  stop.tau_below = params.tau_tolerance;
  const FlowRun r = run(initial, params, stop, {cfg.snapshot_stride, true});
  rep.summary = run_summary(r);
  rep.summary["scenario"] = to_string(cfg.scenario);
  out.text("series.csv", series_csv(r.series));
  rep.numerical_failure = r.reason == StopReason::blow_up;
  try {
    out.text("energy.svg", energy_plot(r.series));
  } catch (const DomainError& e) {
    // A blown-up series can be entirely non-finite; the failure is reported below.
    if (!rep.numerical_failure) throw;
    rep.summary["plot_skipped"] = e.what();
  }
  out.checkpoint("final.ckpt", r.final_state, params);
  return rep;
}

ScenarioReport relax(const ScenarioConfig& cfg) {
  FlowState s;
  s.field = make_initial_map(cfg);
  return relax_like(cfg, s, cfg.flow);
}

std::vector<FlowRun> run_alphas(const ScenarioConfig& cfg, const MapField& init, int stride) {
  const std::vector<double>& alphas = cfg.alpha_schedule;
  std::vector<FlowRun> runs(alphas.size());
  std::vector<std::string> errors(alphas.size());
  const int n = static_cast<int>(alphas.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      FlowParams p = cfg.flow;
      p.alpha = alphas[i];
      StopRule stop;
      stop.t_max = cfg.run_horizon();
      FlowState s;
      s.field = init;
      runs[i] = run(s, p, stop, {stride, true});
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty())
      throw NumericalError("alpha " + alpha_tag(alphas[i]) + ": " + errors[i]);
  return runs;
}

ScenarioReport alpha_sweep(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  const MapField init = make_initial_map(cfg);
  const std::vector<FlowRun> runs = run_alphas(cfg, init, cfg.snapshot_stride);
  const TorusGrid grid = cfg.grid();
  const std::vector<double> scales = default_scales(grid);
  json per = json::array();
  std::vector<double> energies;
  std::vector<std::vector<std::size_t>> centers;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const FlowRun& r = runs[i];
    json j = run_summary(r);
    const ConcentrationReport c =
        detect_concentration(r, r.snapshots.back().t, cfg.epsilon_0, scales);
    j["concentration"] = to_json(c);
    centers.push_back(c.centers);
    per.push_back(j);
    energies.push_back(r.series.back().E);
    out.text("series_alpha_" + alpha_tag(cfg.alpha_schedule[i]) + ".csv", series_csv(r.series));
    if (r.reason == StopReason::blow_up) rep.numerical_failure = true;
  }
  // Centers present (within the smallest scale) for every alpha.
  json common = json::array();
  if (!centers.empty())
    for (std::size_t c : centers.front()) {
      bool all = true;
      for (std::size_t i = 1; i < centers.size() && all; ++i) {
        bool near = false;
        for (std::size_t d : centers[i]) {
          const Vec2 v = periodic_displacement(grid, c, d);
          near = near || std::hypot(v[0], v[1]) <= scales.back();
        }
        all = near;
      }
      if (all) common.push_back({grid.position(c)[0], grid.position(c)[1]});
    }
  rep.summary["scenario"] = "alpha_sweep";
  rep.summary["runs"] = per;
  rep.summary["concentration_intersection"] = common;
  out.text("limit_energies.svg", limit_energy_plot(cfg.alpha_schedule, energies));
  return rep;
}

ScenarioReport minimize(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  const MapField init = make_initial_map(cfg);
  const std::vector<FlowRun> runs = run_alphas(cfg, init, cfg.snapshot_stride);
  const double T = cfg.run_horizon();
  json per = json::array();
  std::vector<double> energies;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const FlowRun& r = runs[i];
    const std::string tag = alpha_tag(cfg.alpha_schedule[i]);
    json j = run_summary(r);
    const SeriesRow& last = r.series.back();
    j["E"] = last.E;
    j["E_alpha"] = last.E_alpha;
    energies.push_back(last.E);
    if (r.reason == StopReason::blow_up) rep.numerical_failure = true;
    try {
      const GoodSlice g = find_good_slice(r, T, static_cast<int>(i) + 1);
      j["good_slice"] = {{"t0", g.t0},
                         {"t0_abs", g.t0_abs},
                         {"tension_mass", g.tension_mass},
                         {"threshold", g.threshold},
                         {"clears", g.clears}};
      const MapField& v = r.snapshots[g.snapshot_index].field;
      const BubbleTree tree = build_tree(v, cfg.epsilon_1, cfg.c_r(), {cfg.zoom_radius_units});
      j["good_slice"]["E"] = dirichlet_energy(v);
      j["bubble_tree"] = to_json(tree);
      out.text("tree_alpha_" + tag + ".svg", tree_plot(tree));
    } catch (const DomainError& e) {
      j["good_slice_error"] = e.what();
    }
    out.text("series_alpha_" + tag + ".csv", series_csv(r.series));
    FlowParams p = cfg.flow;
    p.alpha = cfg.alpha_schedule[i];
    out.checkpoint("final_alpha_" + tag + ".ckpt", r.final_state, p);
    per.push_back(j);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < energies.size(); ++i) decreasing = decreasing && energies[i] < energies[i - 1];
  rep.summary["scenario"] = "minimize";
  rep.summary["horizon"] = T;
  rep.summary["runs"] = per;
  rep.summary["limit_energies_decreasing"] = decreasing;
  rep.summary["eight_pi"] = 8.0 * std::numbers::pi;
  out.text("limit_energies.svg", limit_energy_plot(cfg.alpha_schedule, energies));
  return rep;
}

ScenarioReport bubble_analyze(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  MapField field;
  FlowParams params = cfg.flow;
  if (!cfg.input_checkpoint.empty()) {
    const Checkpoint c = read_checkpoint(cfg.input_checkpoint, cfg.R_M);
    field = c.state.field;
    params.alpha = c.alpha;
    params.r_scale = c.r_scale;
  } else {
    field = make_initial_map(cfg);
  }
  const double E0 = alpha_energy(field, params.alpha);
  rep.summary["scenario"] = "bubble_analyze";
  rep.summary["energy"] = to_json(energy_report(field, params, E0));
  rep.summary["concentration"] =
      to_json(detect_concentration(field, cfg.epsilon_0, default_scales(field.grid)));
  const BubbleTree tree = build_tree(field, cfg.epsilon_1, cfg.c_r(), {cfg.zoom_radius_units});
  rep.summary["bubble_tree"] = to_json(tree);
  rep.summary["eight_pi"] = 8.0 * std::numbers::pi;
  out.text("tree.svg", tree_plot(tree));
  return rep;
}

ScenarioReport surgery_demo(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  const LongNeck ln = make_long_neck(cfg.grid());
  const Competitor comp = build_competitor(ln.field, {ln.spec});
  const ReferenceMaps ref = build_reference_map(ln.field, {ln.spec});
  const Closeness close = close_maps_homotopic(ln.field, comp.field, cfg.sigma, &comp.surgery_mask);
  json j;
  j["scenario"] = "surgery_demo";
  j["path_length"] = ln.path_length;
  j["field_energy"] = dirichlet_energy(ln.field);
  j["competitor_energy"] = dirichlet_energy(comp.field);
  j["competitor_regions"] = {{"kept", comp.energies.kept},
                             {"cones", comp.energies.cones},
                             {"geodesic", comp.energies.geodesic}};
  j["closed_form_geodesic_energy"] =
      2.0 * std::numbers::pi * std::pow(sphere::distance(ln.spec.p, ln.spec.q), 2) /
      std::log(ln.spec.b / ln.spec.a);
  j["outside_necks_max_distance"] = close.max_distance;
  j["outside_necks_close"] = close.close;
  j["degree_field"] = degree(ln.field).integer;
  j["degree_competitor"] = degree(comp.field).integer;
  j["degree_reference_w"] = degree(ref.w).integer;
  j["degree_reference_w_tilde"] = degree(ref.w_tilde).integer;
  j["reference_w_energy"] = dirichlet_energy(ref.w);
  j["reference_w_tilde_energy"] = dirichlet_energy(ref.w_tilde);

  NeckSpec quarter;
  quarter.p = {1.0, 0.0, 0.0};
  quarter.q = {0.0, 0.0, 1.0};
  quarter.a = 1.0;
  quarter.b = std::exp(4.0);
  j["geodesic_neck_quarter_e4"] = {{"energy", geodesic_neck(quarter).energy()},
                                   {"closed_form", std::pow(std::numbers::pi, 3) / 8.0}};
  json sq = json::array();
  for (double K : {20.0, 50.0, 100.0, 400.0}) {
    CylinderMap theta(256, 513, 0.0, K, 3), rho(256, 513, 0.0, K, 3);
    for (int jr = 0; jr < 513; ++jr)
      for (int it = 0; it < 256; ++it) {
        const double th = theta.d_theta() * it;
        const std::vector<double> a{std::cos(th), std::sin(th), 0.0};
        std::copy(a.begin(), a.end(), theta.at(it, jr).begin());
        const double ang = 0.001 * theta.rho(jr);
        const std::vector<double> b{std::sin(ang), 0.0, std::cos(ang)};
        std::copy(b.begin(), b.end(), rho.at(it, jr).begin());
      }
    sq.push_back({{"K", K},
                  {"theta_only_ratio", squeeze_map(theta).energy() / theta.energy()},
                  {"rho_only_ratio", squeeze_map(rho).energy() / rho.energy()},
                  {"bound", 10.0 / K}});
  }
  j["squeeze"] = sq;
  rep.summary = j;
  FlowState s;
  s.field = comp.field;
  out.checkpoint("competitor.ckpt", s, cfg.flow);
  return rep;
}

ScenarioReport stability(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  Outputs out = open_outputs(cfg, rep);
  FlowState a, b;
  a.field = make_initial_map(cfg);
  b.field = perturb_l2(a.field, cfg.seed + 1, cfg.perturbation);
  const double d0 = l2_distance(a.field, b.field);
  StopRule stop;
  stop.t_max = cfg.t_max;
  const FlowRun ra = run(a, cfg.flow, stop, {cfg.snapshot_stride, false});
  const FlowRun rb = run(b, cfg.flow, stop, {cfg.snapshot_stride, false});
  if (ra.snapshots.size() != rb.snapshots.size())
    throw NumericalError("stability runs produced different snapshot counts");
  std::string csv = "t,distance\n";
  std::vector<double> ts, ds;
  double c_min = 0.0;
  for (std::size_t i = 0; i < ra.snapshots.size(); ++i) {
    const double t = ra.snapshots[i].t;
    const double d = l2_distance(ra.snapshots[i].field, rb.snapshots[i].field);
    ts.push_back(t);
    ds.push_back(d);
    csv += format17(t) + ',' + format17(d) + '\n';
    if (t > 0.0) c_min = std::max(c_min, std::log(d / d0) / t);
  }
  const auto fitted = fit_constant([&](double c) {
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ds[i] > d0 * std::exp(c * ts[i]) * (1.0 + 1e-12)) return false;
    return true;
  });
  rep.summary["scenario"] = "stability";
  rep.summary["delta_0"] = d0;
  rep.summary["final_distance"] = ds.back();
  rep.summary["smallest_exponent"] = c_min;
  rep.summary["fitted_C"] = fitted ? json(*fitted) : json(nullptr);
  rep.summary["run_a"] = run_summary(ra);
  rep.summary["run_b"] = run_summary(rb);
  out.text("distance.csv", csv);
  rep.numerical_failure = ra.reason == StopReason::blow_up || rb.reason == StopReason::blow_up;
  return rep;
}

void finish(const ScenarioConfig& cfg, ScenarioReport& rep) {
  const fs::path p = fs::path(cfg.output_dir) / "summary.json";
  write_text(p.string(), rep.summary.dump(2) + "\n");
  rep.files.push_back(p.string());
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  switch (cfg.scenario) {
    case Scenario::relax: rep = relax(cfg); break;
    case Scenario::alpha_sweep: rep = alpha_sweep(cfg); break;
    case Scenario::minimize: rep = minimize(cfg); break;
    case Scenario::bubble_analyze: rep = bubble_analyze(cfg); break;
    case Scenario::surgery_demo: rep = surgery_demo(cfg); break;
    case Scenario::stability: rep = stability(cfg); break;
  }
  finish(cfg, rep);
  return rep;
}

ScenarioReport resume_scenario(const Checkpoint& ckpt, const ScenarioConfig& cfg) {
  FlowParams params = cfg.flow;
  params.alpha = ckpt.alpha;
  params.r_scale = ckpt.r_scale;
  ScenarioReport rep = relax_like(cfg, ckpt.state, params);
  rep.summary["scenario"] = "resume";
  rep.summary["resumed_from_t"] = ckpt.state.t;
  finish(cfg, rep);
  return rep;
}

}  // namespace suflow
