#include "suflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "suflow/errors.hpp"

namespace suflow {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::relax: return "relax";
    case Scenario::alpha_sweep: return "alpha_sweep";
    case Scenario::minimize: return "minimize";
    case Scenario::bubble_analyze: return "bubble_analyze";
    case Scenario::surgery_demo: return "surgery_demo";
    case Scenario::stability: return "stability";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw std::invalid_argument("expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + t + "'");
  return v;
}

long long to_int(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> to_list(const std::string& s) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}')
    throw std::invalid_argument("expected a braced list like {1.2, 1.1}");
  std::vector<double> out;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  if (out.empty()) throw std::invalid_argument("list is empty");
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

InitialMapSpec to_initial(const std::string& s) {
  const auto w = words(s);
  if (w.empty()) throw std::invalid_argument("initial_map is empty");
  InitialMapSpec m;
  const std::string& kind = w[0];
  if (kind == "constant") {
    m.kind = InitialMapSpec::Kind::constant;
    if (w.size() != 1) throw std::invalid_argument("constant takes no parameters");
  } else if (kind == "equatorial_wrap") {
    m.kind = InitialMapSpec::Kind::equatorial_wrap;
    if (w.size() > 2) throw std::invalid_argument("equatorial_wrap takes one parameter d");
    m.d = w.size() == 2 ? static_cast<int>(to_int(w[1])) : 1;
  } else if (kind == "glued_bubble") {
    m.kind = InitialMapSpec::Kind::glued_bubble;
    if (w.size() < 4 || (w.size() - 1) % 3 != 0)
      throw std::invalid_argument("glued_bubble takes triples 's cx cy'");
    for (std::size_t i = 1; i < w.size(); i += 3)
      m.bubbles.push_back({to_double(w[i]), {to_double(w[i + 1]), to_double(w[i + 2])}});
  } else if (kind == "fourier_perturbed") {
    m.kind = InitialMapSpec::Kind::fourier_perturbed;
    if (w.size() != 3) throw std::invalid_argument("fourier_perturbed takes 'seed amplitude'");
    const long long seed = to_int(w[1]);
    if (seed < 0) throw std::invalid_argument("seed must be nonnegative");
    m.seed = static_cast<std::uint64_t>(seed);
    m.amplitude = to_double(w[2]);
  } else if (kind == "long_neck") {
    m.kind = InitialMapSpec::Kind::long_neck;
    if (w.size() != 1) throw std::invalid_argument("long_neck takes no parameters");
  } else {
    throw std::invalid_argument("unknown initial map '" + kind + "'");
  }
  return m;
}

Scenario to_scenario(const std::string& s) {
  const std::string t = trim(s);
  for (Scenario c : {Scenario::relax, Scenario::alpha_sweep, Scenario::minimize,
                     Scenario::bubble_analyze, Scenario::surgery_demo, Scenario::stability})
    if (t == to_string(c)) return c;
  throw std::invalid_argument("unknown scenario '" + t + "'");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::vector<std::string> issues;
  std::map<std::string, std::pair<std::string, int>> entries;

  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (entries.count(key)) {
      issues.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    entries[key] = {value, lineno};
  }

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"scenario", [&](const std::string& v) { cfg.scenario = to_scenario(v); }},
      {"nx", [&](const std::string& v) { cfg.nx = static_cast<int>(to_int(v)); }},
      {"L", [&](const std::string& v) { cfg.L = to_double(v); }},
      {"R_M", [&](const std::string& v) { cfg.R_M = to_double(v); }},
      {"k", [&](const std::string& v) { cfg.k = static_cast<int>(to_int(v)); }},
      {"alpha", [&](const std::string& v) { cfg.flow.alpha = to_double(v); }},
      {"r_scale", [&](const std::string& v) { cfg.flow.r_scale = to_double(v); }},
      {"cfl_factor", [&](const std::string& v) { cfg.flow.cfl_factor = to_double(v); }},
      {"integrator",
       [&](const std::string& v) {
         if (v == "euler")
           cfg.flow.integrator = Integrator::euler;
         else if (v == "rk2")
           cfg.flow.integrator = Integrator::rk2;
         else
           throw std::invalid_argument("integrator must be euler or rk2");
       }},
      {"tau_tolerance", [&](const std::string& v) { cfg.flow.tau_tolerance = to_double(v); }},
      {"blowup_sup_e", [&](const std::string& v) { cfg.flow.blowup_sup_e = to_double(v); }},
      {"alpha_schedule", [&](const std::string& v) { cfg.alpha_schedule = to_list(v); }},
      {"initial_map", [&](const std::string& v) { cfg.initial = to_initial(v); }},
      {"epsilon_0", [&](const std::string& v) { cfg.epsilon_0 = to_double(v); }},
      {"epsilon_1", [&](const std::string& v) { cfg.epsilon_1 = to_double(v); }},
      {"C_R", [&](const std::string& v) { cfg.C_R = to_double(v); }},
      {"sigma", [&](const std::string& v) { cfg.sigma = to_double(v); }},
      {"output_dir", [&](const std::string& v) { cfg.output_dir = v; }},
      {"input_checkpoint", [&](const std::string& v) { cfg.input_checkpoint = v; }},
      {"snapshot_stride",
       [&](const std::string& v) { cfg.snapshot_stride = static_cast<int>(to_int(v)); }},
      {"seed",
       [&](const std::string& v) {
         const long long s = to_int(v);
         if (s < 0) throw std::invalid_argument("seed must be nonnegative");
         cfg.seed = static_cast<std::uint64_t>(s);
       }},
      {"t_max", [&](const std::string& v) { cfg.t_max = to_double(v); }},
      {"horizon", [&](const std::string& v) { cfg.horizon = to_double(v); }},
      {"perturbation", [&](const std::string& v) { cfg.perturbation = to_double(v); }},
      {"zoom_radius_units", [&](const std::string& v) { cfg.zoom_radius_units = to_double(v); }},
  };

  std::map<std::string, int> line_of;
  for (const auto& [key, entry] : entries) {
    const auto& [value, ln] = entry;
    line_of[key] = ln;
    const auto it = setters.find(key);
    if (it == setters.end()) {
      issues.push_back("line " + std::to_string(ln) + ": unknown key '" + key + "'");
      continue;
    }
    try {
      it->second(value);
    } catch (const std::exception& e) {
      issues.push_back("line " + std::to_string(ln) + ": " + key + ": " + e.what());
    }
  }
  if (!entries.count("scenario")) issues.push_back("line 0: missing required key 'scenario'");

  auto where = [&](const std::string& key) {
    const auto it = line_of.find(key);
    return "line " + std::to_string(it == line_of.end() ? 0 : it->second) + ": ";
  };
  auto check = [&](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) issues.push_back(where(key) + msg);
  };

  check(cfg.nx >= 8, "nx", "nx >= 8 required");
  check(cfg.L > 0.0, "L", "L must be positive");
  check(!cfg.R_M || (*cfg.R_M > 0.0 && *cfg.R_M <= 0.25 * cfg.L * (1 + 1e-12)), "R_M",
        "R_M must lie in (0, L/4]");
  check(cfg.k >= 3, "k", "k >= 3 required");
  try {
    cfg.flow.validate();
  } catch (const ConfigError& e) {
    std::string key = "alpha";
    const std::string msg = e.what();
    if (msg.find("r_scale") != std::string::npos) key = "r_scale";
    if (msg.find("cfl") != std::string::npos) key = "cfl_factor";
    if (msg.find("tau") != std::string::npos) key = "tau_tolerance";
    if (msg.find("blowup") != std::string::npos) key = "blowup_sup_e";
    issues.push_back(where(key) + msg);
  }
  for (std::size_t i = 0; i < cfg.alpha_schedule.size(); ++i) {
    const double a = cfg.alpha_schedule[i];
    check(a > 1.0 && a <= 2.0, "alpha_schedule", "schedule entries must lie in (1, 2]");
    if (i > 0 && !(a < cfg.alpha_schedule[i - 1])) {
      issues.push_back(where("alpha_schedule") + "schedule must decrease");
      break;
    }
  }
  check(cfg.epsilon_0 > 0.0, "epsilon_0", "epsilon_0 must be positive");
  check(cfg.epsilon_1 > 0.0, "epsilon_1", "epsilon_1 must be positive");
  check(!cfg.C_R || *cfg.C_R >= 0.0, "C_R", "C_R must be nonnegative");
  check(cfg.sigma > 0.0 && cfg.sigma < std::numbers::pi, "sigma", "sigma must lie in (0, pi)");
  check(cfg.snapshot_stride >= 1, "snapshot_stride", "snapshot_stride >= 1 required");
  check(cfg.t_max > 0.0, "t_max", "t_max must be positive");
  check(!cfg.horizon || *cfg.horizon > 0.0, "horizon", "horizon must be positive");
  check(cfg.perturbation > 0.0, "perturbation", "perturbation must be positive");
  check(cfg.zoom_radius_units >= 2.0, "zoom_radius_units", "zoom_radius_units >= 2 required");
  check(!cfg.output_dir.empty(), "output_dir", "output_dir must not be empty");

  const double h = cfg.L / std::max(cfg.nx, 1);
  switch (cfg.initial.kind) {
    case InitialMapSpec::Kind::equatorial_wrap:
      check(cfg.initial.d >= 0, "initial_map", "equatorial_wrap needs d >= 0");
      break;
    case InitialMapSpec::Kind::fourier_perturbed:
      check(cfg.initial.amplitude >= 0.0 && cfg.initial.amplitude < 1.0, "initial_map",
            "fourier amplitude must lie in [0, 1)");
      break;
    case InitialMapSpec::Kind::glued_bubble:
      for (const GluedBubble& b : cfg.initial.bubbles) {
        check(b.s > 0.0, "initial_map", "bubble scale must be positive");
        check(b.s >= 4.0 * h || cfg.scenario == Scenario::bubble_analyze, "initial_map",
              "bubble scale s < 4h is under-resolved (allowed only for bubble_analyze)");
      }
      check(cfg.k == 3, "initial_map", "glued_bubble needs k = 3");
      break;
    case InitialMapSpec::Kind::long_neck:
      check(cfg.k == 3, "initial_map", "long_neck needs k = 3");
      break;
    default:
      break;
  }
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(), [](const std::string& a, const std::string& b) {
      return std::atoi(a.c_str() + 5) < std::atoi(b.c_str() + 5);
    });
    std::string msg;
    for (const auto& s : issues) msg += s + "\n";
    msg.pop_back();
    throw ConfigError(msg);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace suflow
