// Acceptance checks, one line per criterion:
//   acceptance [criterion...] [--cli path/to/suflow] [--work dir]
// With no criterion named, all of them run. Exit status is nonzero when any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "suflow/bubbletree.hpp"
#include "suflow/checkpoint.hpp"
#include "suflow/config.hpp"
#include "suflow/diagnostics.hpp"
#include "suflow/errors.hpp"
#include "suflow/flow.hpp"
#include "suflow/initial_maps.hpp"
#include "suflow/report.hpp"
#include "suflow/scenario.hpp"
#include "suflow/surgery.hpp"

using namespace suflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g_cli;
fs::path g_work = fs::temp_directory_path() / "suflow_acceptance";

fs::path workdir(const std::string& name) {
  const fs::path p = g_work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 1. Equatorial wrap is a fixed point.
Outcome stationary() {
  const auto t0 = std::chrono::steady_clock::now();
  FlowState s;
  s.field = make_equatorial_wrap(TorusGrid::make(64, 1.0), 3, 1);
  const std::vector<double> u0 = s.field.values;
  FlowParams p;
  p.alpha = 1.25;
  Stepper st(s, p);
  const double dt = stable_dt(s.field, p);
  for (int i = 0; i < 10000; ++i) st.advance(dt);
  double disp = 0.0;
  const auto& u = st.state().field.values;
  for (std::size_t n = 0; n < u.size() / 3; ++n) {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) d2 += (u[n * 3 + c] - u0[n * 3 + c]) * (u[n * 3 + c] - u0[n * 3 + c]);
    disp = std::max(disp, std::sqrt(d2));
  }
  const double secs = seconds_since(t0);
  return {disp <= 1e-10 && secs <= 10.0,
          fmt("sup displacement %.3e (<= 1e-10) after 10^4 steps, %.2f s (<= 10 s)", disp, secs)};
}

// Shared relaxation run for criteria 2, 3 and 6: fine snapshots up to
// t = 0.03 for the monotonicity windows, then coarse ones to convergence.
struct RelaxRun {
  FlowRun fine;
  FlowRun rest;
  double seconds = 0.0;
};

const RelaxRun& relax_run() {
  static RelaxRun r = [] {
    RelaxRun out;
    const auto t0 = std::chrono::steady_clock::now();
    FlowState s;
    s.field = make_fourier_perturbed(TorusGrid::make(64, 1.0), 3, 3, 0.3);
    FlowParams p;
    p.alpha = 1.1;
    p.integrator = Integrator::rk2;
    StopRule fine;
    fine.t_max = 0.03;
    fine.tau_below = 1e-5;
    out.fine = run(s, p, fine, {5, true});
    StopRule rest;
    rest.t_max = 10.0;
    rest.tau_below = 1e-5;
    out.rest = run(out.fine.final_state, p, rest, {1000, true});
    out.seconds = seconds_since(t0);
    return out;
  }();
  return r;
}

// 2. E_alpha nonincreasing at every step.
Outcome monotone_energy() {
  const RelaxRun& r = relax_run();
  const double E0 = r.fine.series.front().E_alpha_r;
  double worst = -1e300;
  std::size_t steps = 0;
  for (const FlowRun* run : {&r.fine, &r.rest})
    for (std::size_t i = 1; i < run->series.size(); ++i, ++steps)
      worst = std::max(worst, run->series[i].E_alpha_r - run->series[i - 1].E_alpha_r);
  const bool converged = r.rest.reason == StopReason::converged;
  return {converged && worst <= 1e-10 * E0 && r.seconds <= 60.0,
          fmt("%s after %zu steps, tau %.2e; worst step increase %.3e (<= %.3e); %.1f s (<= 60 s)",
              to_string(r.rest.reason), steps, r.rest.series.back().tau_norm, worst, 1e-10 * E0,
              r.seconds)};
}

// 3. Dissipation identity on the same run.
Outcome dissipation_identity() {
  const RelaxRun& r = relax_run();
  const double E0 = r.fine.series.front().E_alpha_r;
  const double E1 = r.rest.series.back().E_alpha_r;
  const double D = r.rest.final_state.cumulative_dissipation;
  const double err = std::abs(E0 - E1 - D);
  return {err <= 1e-3 * E0,
          fmt("|E_a(0) - E_a(end) - D| = %.3e (<= %.3e); E_a(0) %.6f, E_a(end) %.6f, D %.6f", err,
              1e-3 * E0, E0, E1, D)};
}

// 4. Degree conservation while resolved.
Outcome degree_conservation() {
  const TorusGrid g = TorusGrid::make(128, 1.0);
  FlowState s;
  s.field = make_glued_bubbles(g, {{0.1, {0.5, 0.5}}});
  FlowParams p;
  p.alpha = 1.1;
  StopRule stop;
  stop.t_max = 0.02;
  stop.sup_e_above = 0.5 / (g.h() * g.h());
  const FlowRun r = run(s, p, stop, {200, true});
  long bad = 0;
  std::size_t counted = 0;
  for (const SeriesRow& row : r.series) {
    if (row.sup_e * g.h() * g.h() > 0.5) break;
    ++counted;
    if (row.degree_int != 1) ++bad;
  }
  for (const Snapshot& sn : r.snapshots)
    if (sn.t <= r.series[counted - 1].t && degree(sn.field).integer != 1) ++bad;
  return {bad == 0 && counted > 1,
          fmt("degree 1 at all %zu resolved states and %zu snapshots (t up to %.4f, stop %s)",
              counted, r.snapshots.size(), r.series[counted - 1].t, to_string(r.reason))};
}

// 5. Energy identity at desk scale.
Outcome energy_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = workdir("minimize");
  const ScenarioConfig cfg = parse_config(
      "scenario = minimize\n"
      "nx = 256\n"
      "initial_map = glued_bubble 0.05 0.5 0.5\n"
      "alpha_schedule = {1.2, 1.1, 1.05, 1.02}\n"
      "horizon = 0.01\n"
      "snapshot_stride = 500\n"
      "output_dir = " + (dir / "minimize").string() + "\n");
  const ScenarioReport rep = run_scenario(cfg);
  std::vector<double> E;
  for (const auto& r : rep.summary["runs"]) E.push_back(r["E"].get<double>());
  bool decreasing = true;
  for (std::size_t i = 1; i < E.size(); ++i) decreasing = decreasing && E[i] < E[i - 1];
  const double eight_pi = 8 * kPi;
  const double last_rel = std::abs(E.back() - eight_pi) / eight_pi;

  const ScenarioConfig acfg = parse_config(
      "scenario = bubble_analyze\n"
      "nx = 256\n"
      "input_checkpoint = " + (dir / "minimize" / "final_alpha_1.02.ckpt").string() + "\n"
      "output_dir = " + (dir / "analyze").string() + "\n");
  const ScenarioReport an = run_scenario(acfg);
  const auto& nodes = an.summary["bubble_tree"]["nodes"];
  const double eps1 = acfg.epsilon_1;
  bool one_bubble = nodes.size() == 1;
  double eb = 0.0, en = 0.0;
  if (one_bubble) {
    eb = nodes[0]["bubble_energy"].get<double>();
    en = nodes[0]["neck_energy"].get<double>();
  }
  const bool bubble_ok = one_bubble && std::abs(eb - eight_pi) <= 0.1 * eight_pi && en < eps1 / 6;
  const double secs = seconds_since(t0);
  std::string list;
  for (double e : E) list += fmt("%.4f ", e);
  return {decreasing && last_rel <= 0.1 && bubble_ok && secs <= 900.0,
          fmt("limit energies [%s] %s; alpha 1.02 off 8pi by %.2f%% (<= 10%%); %zu bubble(s), "
              "energy %.4f (8pi %.4f), neck %.4f (< %.4f); %.0f s (<= 900 s)",
              list.c_str(), decreasing ? "decreasing" : "NOT decreasing", 100 * last_rel,
              nodes.size(), eb, eight_pi, en, eps1 / 6, secs)};
}

// 6. Almost monotonicity of Psi.
Outcome monotonicity() {
  const RelaxRun& r = relax_run();
  const FlowRun& run = r.fine;
  const double t0 = run.snapshots.back().t;
  const std::vector<double> radii{0.01, 0.02, 0.04, 0.08};
  const TorusGrid& g = run.snapshots.front().field.grid;
  const Snapshot& last = run.snapshots.back();
  std::vector<std::size_t> centers;
  {
    const auto e = energy_density(last.field);
    centers.push_back(static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin()));
  }
  for (auto [x, y] : std::vector<std::pair<int, int>>{{16, 16}, {48, 16}, {16, 48}, {40, 40}})
    centers.push_back(g.index(x, y));
  std::vector<std::vector<double>> values;
  for (std::size_t c : centers)
    values.push_back(psi(run, MonotonicityProbe::make(g, c, t0, radii), run.params.alpha));
  const auto fitted = fit_constant([&](double c) {
    for (const auto& v : values)
      if (almost_monotonicity_check(v, radii, run.E0, c) > 0.0) return false;
    return true;
  });

  // Constant map: closed form where the cutoff does not truncate the kernel.
  FlowState cs;
  cs.field = make_constant(g, 3);
  StopRule stop;
  stop.t_max = t0;
  FlowParams p = run.params;
  const FlowRun crun = suflow::run(cs, p, stop, {5, false});
  const auto cpsi = psi(crun, MonotonicityProbe::make(g, g.index(32, 32), crun.snapshots.back().t, radii),
                        p.alpha);
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    worst_rel = std::max(worst_rel, std::abs(cpsi[i] / (12 * kPi * std::pow(radii[i], 2 * p.alpha)) - 1));
  return {fitted && *fitted <= 50.0 && worst_rel <= 0.01,
          fmt("fitted c %s over %zu centers x 4 radii (<= 50); constant map Psi vs 12 pi rho^(2a) at "
              "rho 0.01, 0.02: worst %.3f%% (<= 1%%)",
              fitted ? fmt("%g", *fitted).c_str() : "none", centers.size(), 100 * worst_rel)};
}

// 7. Gronwall stability.
Outcome stability() {
  FlowState a, b;
  a.field = make_fourier_perturbed(TorusGrid::make(64, 1.0), 3, 3, 0.3);
  b.field = perturb_l2(a.field, 17, 1e-6);
  const double d0 = l2_distance(a.field, b.field);
  FlowParams p;
  p.alpha = 1.1;
  StopRule stop;
  stop.t_max = 0.1;
  const FlowRun ra = run(a, p, stop, {100, false});
  const FlowRun rb = run(b, p, stop, {100, false});
  std::vector<double> ts, ds;
  for (std::size_t i = 0; i < std::min(ra.snapshots.size(), rb.snapshots.size()); ++i) {
    ts.push_back(ra.snapshots[i].t);
    ds.push_back(l2_distance(ra.snapshots[i].field, rb.snapshots[i].field));
  }
  const auto fitted = fit_constant([&](double c) {
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ds[i] > d0 * std::exp(c * ts[i]) * (1 + 1e-12)) return false;
    return true;
  });
  const bool aligned = ra.snapshots.size() == rb.snapshots.size();
  return {aligned && fitted && *fitted <= 100.0,
          fmt("delta0 %.3e, final distance %.3e at t %.3f over %zu snapshots; fitted C %s (<= 100)", d0,
              ds.back(), ts.back(), ts.size(), fitted ? fmt("%g", *fitted).c_str() : "none")};
}

// 8a. Geodesic neck closed form.
Outcome geodesic_closed_form() {
  std::string detail;
  bool ok = true;
  struct Case {
    double d, ratio_log;
  };
  for (Case c : {Case{kPi / 2, 4.0}, Case{1.0, 2.0}, Case{0.3, 6.0}}) {
    NeckSpec s;
    s.q = {0.0, 0.0, 1.0};
    s.p = {std::sin(c.d), 0.0, std::cos(c.d)};
    s.a = 0.5;
    s.b = 0.5 * std::exp(c.ratio_log);
    const double E = geodesic_neck(s).energy();
    const double closed = 2 * kPi * c.d * c.d / c.ratio_log;
    const double rel = std::abs(E / closed - 1);
    ok = ok && rel <= 0.01;
    detail += fmt("d %.4f log(b/a) %.0f: %.5f vs %.5f (%.3f%%); ", c.d, c.ratio_log, E, closed, 100 * rel);
  }
  return {ok, detail + "tolerance 1%"};
}

// 8b. Squeeze ratio within 1 +- 10/K.
Outcome squeeze_ratio() {
  bool ok = true;
  std::string detail;
  for (double K : {20.0, 50.0, 100.0, 400.0}) {
    CylinderMap th(256, 513, 0.0, K, 3), rh(64, 1025, 0.0, K, 3);
    for (int j = 0; j < 513; ++j)
      for (int i = 0; i < 256; ++i) {
        const double a = th.d_theta() * i;
        th.at(i, j)[0] = std::cos(a);
        th.at(i, j)[1] = std::sin(a);
        th.at(i, j)[2] = 0.0;
      }
    for (int j = 0; j < 1025; ++j)
      for (int i = 0; i < 64; ++i) {
        const double a = 0.01 * rh.rho(j);
        rh.at(i, j)[0] = std::sin(a);
        rh.at(i, j)[1] = 0.0;
        rh.at(i, j)[2] = std::cos(a);
      }
    const double rt = squeeze_map(th).energy() / th.energy();
    const double rr = squeeze_map(rh).energy() / rh.energy();
    const bool k_ok = std::abs(rt - 1) <= 10 / K && std::abs(rr - 1) <= 10 / K;
    ok = ok && k_ok;
    detail += fmt("K %g: theta %.4f rho %.4f bound %.3f%s; ", K, rt, rr, 10 / K, k_ok ? "" : " VIOLATED");
  }
  return {ok, detail};
}

// 8c. Cone extension energy scales as d^2.
Outcome cone_scaling() {
  std::vector<double> ratios;
  const std::vector<double> p{0.0, 0.0, 1.0};
  for (double d : {0.2, 0.1, 0.05}) {
    std::vector<std::vector<double>> loop;
    for (int i = 0; i < 256; ++i) {
      const double th = 2 * kPi * i / 256;
      loop.push_back(sphere::exp_point(p, std::vector<double>{d * std::cos(th), d * std::sin(th), 0.0}));
    }
    ratios.push_back(cone_extension(loop, p, ConeDirection::inward).energy() / (d * d));
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  return {hi <= 1.2 * lo, fmt("E(d)/d^2 = %.5f, %.5f, %.5f; spread %.3f%% (<= 20%%)", ratios[0],
                              ratios[1], ratios[2], 100 * (hi / lo - 1))};
}

// 9. Competitor inequality.
Outcome competitor() {
  const LongNeck ln = make_long_neck(TorusGrid::make(512, 1.0));
  const Competitor c = build_competitor(ln.field, {ln.spec});
  const double Ef = dirichlet_energy(ln.field), Ec = dirichlet_energy(c.field);
  const Closeness cl = close_maps_homotopic(ln.field, c.field, 0.5, &c.surgery_mask);
  return {Ec < Ef && cl.close && cl.max_distance == 0.0,
          fmt("E(competitor) %.5f < E(field) %.5f; cones %.5f, geodesic %.5f; outside necks: close %s, "
              "max distance %g",
              Ec, Ef, c.energies.cones, c.energies.geodesic, cl.close ? "yes" : "no", cl.max_distance)};
}

int sh(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// 10. Infrastructure.
Outcome infrastructure() {
  std::string detail;
  bool ok = true;
  const fs::path dir = workdir("infra");

  FlowState s;
  s.field = make_fourier_perturbed(TorusGrid::make(32, 1.0), 3, 9, 0.3);
  StopRule stop;
  stop.t_max = 0.001;
  const FlowRun r = run(s, FlowParams{}, stop, {100, false});
  const auto bytes = encode_checkpoint(r.final_state, FlowParams{});
  const Checkpoint back = decode_checkpoint(bytes);
  const bool round = back.state.field.values == r.final_state.field.values &&
                     back.state.t == r.final_state.t &&
                     back.state.cumulative_dissipation == r.final_state.cumulative_dissipation &&
                     encode_checkpoint(back.state, FlowParams{}) == bytes;
  ok = ok && round;
  detail += fmt("checkpoint round trip %s; ", round ? "bit-exact" : "MISMATCH");

  if (g_cli.empty()) return {false, detail + "CLI path not given (--cli)"};
  const std::string cli = g_cli;
  auto write = [&](const std::string& name, const std::string& text) {
    write_text((dir / name).string(), text);
    return (dir / name).string();
  };
  std::string outs[2];
  for (int i = 0; i < 2; ++i) {
    const std::string cfg = write("det" + std::to_string(i) + ".cfg",
                                  "scenario = relax\nnx = 32\ninitial_map = fourier_perturbed 5 0.3\n"
                                  "t_max = 0.003\nseed = 5\noutput_dir = " +
                                      (dir / ("det" + std::to_string(i))).string() + "\n");
    ok = ok && sh(cli + " run " + cfg) == 0;
    outs[i] = read_text((dir / ("det" + std::to_string(i)) / "series.csv").string()) +
              read_text((dir / ("det" + std::to_string(i)) / "final.ckpt").string());
  }
  const bool same = outs[0] == outs[1];
  ok = ok && same;
  detail += fmt("repeat run CSV+checkpoint %s; ", same ? "byte-identical" : "DIFFER");

  // Corrupt checkpoint with a non-finite value: the flow must fail numerically.
  FlowState nan_state;
  nan_state.field = make_fourier_perturbed(TorusGrid::make(16, 1.0), 3, 1, 0.2);
  nan_state.field.values[10] = std::nan("");
  write_checkpoint((dir / "nan.ckpt").string(), nan_state, FlowParams{});
  const std::string nan_cfg = write("nan.cfg", "scenario = relax\nnx = 16\nt_max = 0.01\noutput_dir = " +
                                                   (dir / "nan").string() + "\n");
  write_text((dir / "bad.ckpt").string(), "NOTACKPT00000000");
  write_text((dir / "bad.csv").string(), "hello\n1,2\n");
  struct Expect {
    std::string what, cmd;
    int code;
  };
  const std::vector<Expect> cases = {
      {"valid run", cli + " run " + write("ok.cfg", "scenario = relax\nnx = 16\ninitial_map = constant\n"
                                                     "output_dir = " + (dir / "ok").string() + "\n"), 0},
      {"plot", cli + " plot " + (dir / "ok" / "series.csv").string(), 0},
      {"analyze", cli + " analyze " + (dir / "ok" / "final.ckpt").string(), 0},
      {"no verb", cli, 1},
      {"unknown verb", cli + " fly", 1},
      {"missing config", cli + " run " + (dir / "none.cfg").string(), 1},
      {"invalid config", cli + " run " + write("bad.cfg", "scenario = relax\nnx = 4\n"), 1},
      {"unknown key", cli + " run " + write("bad2.cfg", "scenario = relax\nbogus = 1\n"), 1},
      {"corrupt checkpoint", cli + " analyze " + (dir / "bad.ckpt").string(), 1},
      {"missing checkpoint", cli + " resume " + (dir / "none.ckpt").string() + " " + nan_cfg, 1},
      {"malformed csv", cli + " plot " + (dir / "bad.csv").string(), 1},
      {"numerical failure", cli + " resume " + (dir / "nan.ckpt").string() + " " + nan_cfg, 2},
  };
  int good = 0;
  for (const Expect& e : cases) {
    const int rc = sh(e.cmd);
    if (rc == e.code)
      ++good;
    else
      detail += fmt("[%s: exit %d, expected %d] ", e.what.c_str(), rc, e.code);
  }
  ok = ok && good == static_cast<int>(cases.size());
  detail += fmt("CLI exit codes %d/%zu as documented", good, cases.size());
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"1", stationary},           {"2", monotone_energy},     {"3", dissipation_identity},
      {"4", degree_conservation},  {"5", energy_identity},     {"6", monotonicity},
      {"7", stability},            {"8a", geodesic_closed_form}, {"8b", squeeze_ratio},
      {"8c", cone_scaling},        {"9", competitor},          {"10", infrastructure},
  };
  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc)
      g_cli = argv[++i];
    else if (a == "--work" && i + 1 < argc)
      g_work = argv[++i];
    else
      wanted.push_back(a);
  }
  int failures = 0;
  for (const auto& [id, fn] : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %-3s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
