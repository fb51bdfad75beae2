#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "suflow/config.hpp"
#include "suflow/geometry.hpp"
#include "suflow/surgery.hpp"

namespace suflow {

// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne draw;
// the engine sequence is fixed by the standard, unlike std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

MapField make_constant(const TorusGrid& grid, int k);
// (cos(2 pi d x / L), sin(2 pi d x / L), 0, ...).
MapField make_equatorial_wrap(const TorusGrid& grid, int k, int d);
// Degree-one inverse stereographic bubbles of scale s, each glued to the
// north pole across the annulus [r_out/2, r_out], r_out = min(16 s, 0.48 L).
MapField make_glued_bubbles(const TorusGrid& grid, const std::vector<GluedBubble>& bubbles);
// North pole plus low-frequency tangent noise (modes |m|, |n| <= 2) of the
// given sup amplitude, projected to the sphere.
MapField make_fourier_perturbed(const TorusGrid& grid, int k, std::uint64_t seed,
                                double amplitude);

// A degree-one bubble at the torus center, cut to q = north pole, joined to
// the constant p (d(p, q) = 0.1) by a long detour neck that traverses a
// broken geodesic q -> m -> p log-uniformly in r. Lengths scale with L.
struct LongNeck {
  MapField field;
  NeckSpec spec;        // lambda R = 0.02 L, delta = 0.24 L
  double path_length;   // length of the detour q -> m -> p
};
LongNeck make_long_neck(const TorusGrid& grid);

MapField make_initial_map(const ScenarioConfig& config);

// Field plus tangent low-frequency noise rescaled so the L^2 distance to the
// original, after projection, is close to l2_size.
MapField perturb_l2(const MapField& field, std::uint64_t seed, double l2_size);

double l2_distance(const MapField& a, const MapField& b);

}  // namespace suflow
