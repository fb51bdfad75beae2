#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "suflow/flow.hpp"
#include "suflow/geometry.hpp"

namespace suflow {

enum class Scenario { relax, alpha_sweep, minimize, bubble_analyze, surgery_demo, stability };
const char* to_string(Scenario s);

struct GluedBubble {
  double s = 0.1;
  Vec2 center{0.5, 0.5};
};

struct InitialMapSpec {
  enum class Kind { constant, equatorial_wrap, glued_bubble, fourier_perturbed, long_neck };
  Kind kind = Kind::constant;
  int d = 1;                          // equatorial_wrap
  std::vector<GluedBubble> bubbles;   // glued_bubble
  std::uint64_t seed = 0;             // fourier_perturbed
  double amplitude = 0.05;            // fourier_perturbed
};

struct ScenarioConfig {
  Scenario scenario = Scenario::relax;
  int nx = 64;
  double L = 1.0;
  std::optional<double> R_M;
  int k = 3;
  FlowParams flow;
  std::vector<double> alpha_schedule{1.2, 1.1, 1.05, 1.02};
  InitialMapSpec initial;
  double epsilon_0 = 1.0;
  double epsilon_1 = 12.566370614359172;  // 4 pi
  std::optional<double> C_R;              // defaults to epsilon_1 / 6
  double sigma = 0.5;
  std::string output_dir = "out";
  std::string input_checkpoint;  // bubble_analyze: analyze this state instead
  int snapshot_stride = 10;
  std::uint64_t seed = 0;
  double t_max = 0.1;
  std::optional<double> horizon;  // minimize / alpha_sweep run length, default t_max
  double perturbation = 1e-6;     // stability: L^2 size of the initial offset
  double zoom_radius_units = 32.0;

  TorusGrid grid() const { return TorusGrid::make(nx, L, R_M ? *R_M : 0.25 * L); }
  double c_r() const { return C_R ? *C_R : epsilon_1 / 6.0; }
  double run_horizon() const { return horizon ? *horizon : t_max; }
};

// Parses flat `key = value` text; `#` starts a comment, lists use braces.
// Throws ConfigError naming every violation with its line number.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace suflow
