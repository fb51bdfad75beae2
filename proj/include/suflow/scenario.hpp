#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "suflow/checkpoint.hpp"
#include "suflow/config.hpp"
#include "suflow/flow.hpp"

namespace suflow {

// Almost-harmonic time slice: run time is normalized by the horizon and the
// slice minimizes the discrete tension mass sum |du/dt|^2 h^2 over snapshots
// with normalized time in [1/2, 1].
struct GoodSlice {
  double t0 = 0.0;      // normalized
  double t0_abs = 0.0;  // run time
  std::size_t snapshot_index = 0;
  double tension_mass = 0.0;
  double threshold = 0.0;  // 2^-i
  bool clears = false;
};

GoodSlice find_good_slice(const FlowRun& run, double horizon, int i);

struct ScenarioReport {
  nlohmann::json summary;
  std::vector<std::string> files;
  bool numerical_failure = false;
};

ScenarioReport run_scenario(const ScenarioConfig& config);
// Continues a stored state under the config's flow settings until t_max or
// convergence, writing the same outputs as relax.
ScenarioReport resume_scenario(const Checkpoint& checkpoint, const ScenarioConfig& config);

}  // namespace suflow
