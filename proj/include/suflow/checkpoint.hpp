#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suflow/flow.hpp"

namespace suflow {

// Binary layout: "SUFLOW01", little-endian u64 nx, ny, k, then little-endian
// f64 L, alpha, r_scale, t, cumulative_dissipation, then nx*ny*k f64 field
// values in node order with components innermost.
struct Checkpoint {
  FlowState state;
  double alpha = 0.0;
  double r_scale = 1.0;
};

std::vector<std::uint8_t> encode_checkpoint(const FlowState& state, const FlowParams& params);
// The layout stores neither R_M nor the step count: R_M is taken from the
// argument (default L/4) and step_count restarts at 0.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             std::optional<double> R_M = std::nullopt);

void write_checkpoint(const std::string& path, const FlowState& state, const FlowParams& params);
Checkpoint read_checkpoint(const std::string& path, std::optional<double> R_M = std::nullopt);

}  // namespace suflow
