#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "suflow/geometry.hpp"

namespace suflow {

// Field resampled on a square plane grid in units of the bubble scale:
// chart node (i, j) sits at y = ((i, j) - (n-1)/2) * spacing and samples the
// torus field at center + lambda * y.
struct PlaneChart {
  int n = 129;
  int k = 3;
  double radius_units = 32.0;
  double lambda = 0.0;
  Vec2 center{0.0, 0.0};
  std::vector<double> values;

  double spacing() const { return 2.0 * radius_units / (n - 1); }
  std::vector<double> density() const;
  double center_density() const;
  // sum of chart density over |y| <= radius_units_disk, skipping the given
  // excluded disks (centers and radii in chart units).
  double disk_energy(double radius_units_disk, const std::vector<Vec2>& excluded_centers = {},
                     const std::vector<double>& excluded_radii = {}) const;
};

struct Window {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

struct RescaledBubble {
  Vec2 center{0.0, 0.0};
  std::size_t node = 0;
  double lambda = 0.0;
  PlaneChart chart;
};

// Bilinear interpolation of the field at a torus point, projected to the sphere.
std::vector<double> sample_field(const MapField& field, const Vec2& x);

RescaledBubble detect_and_rescale(const MapField& field, const std::optional<Window>& window,
                                  double zoom_radius_units, int chart_n = 129,
                                  double chart_radius_units = 0.0);

// Largest lambda in [0, epsilon_out] whose annulus B_eps(c) \ B_lambda(c)
// carries energy >= C_R. Nodes inside the excluded disks do not count.
double lambda_by_energy(const MapField& field, std::size_t center, double epsilon_out,
                        double C_R, const std::vector<Vec2>& excluded_centers = {},
                        const std::vector<double>& excluded_radii = {});
double lambda_by_energy(const TorusGrid& grid, const std::vector<double>& density,
                        std::size_t center, double epsilon_out, double C_R,
                        const std::vector<Vec2>& excluded_centers = {},
                        const std::vector<double>& excluded_radii = {});

struct BubbleNode {
  Vec2 center{0.0, 0.0};
  std::size_t center_node = 0;
  double lambda = 0.0;      // e(c)^{-1/2}
  double lambda_cut = 0.0;  // energy-defined cut radius
  PlaneChart chart;
  double bubble_energy = 0.0;
  double neck_inner = 0.0;
  double neck_outer = 0.0;
  double neck_energy = 0.0;
  int parent = -1;
  int depth = 1;
  std::vector<int> children;
  std::vector<double> p;  // field value approached on the outer neck circle
  std::vector<double> q;  // field value approached on the inner neck circle
};

struct BubbleTree {
  MapField root;
  std::vector<BubbleNode> nodes;
  double total_energy_in = 0.0;
  double body_energy = 0.0;
  double identity_residual = 0.0;
  double epsilon_1 = 0.0;
  double C_R = 0.0;
};

struct TreeOptions {
  double zoom_radius_units = 32.0;
  int chart_n = 129;
  int max_depth = 8;
  double neck_factor = 2.0;  // neck_inner = neck_factor * lambda_cut when room allows
};

BubbleTree build_tree(const MapField& field, double epsilon_1, double C_R,
                      const TreeOptions& options = {});

}  // namespace suflow
