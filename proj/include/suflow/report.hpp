#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "suflow/bubbletree.hpp"
#include "suflow/diagnostics.hpp"
#include "suflow/flow.hpp"

namespace suflow {

// 17 significant digits, the rendering shared by CSV, JSON text and plots.
std::string format17(double v);

inline constexpr const char* kSeriesHeader =
    "step,t,E,E_alpha,dissipation,sup_e,degree_real,degree_int,tau_norm";

std::string series_csv(const std::vector<SeriesRow>& rows);
// Parses CSV produced by series_csv; throws ConfigError on malformed input.
std::vector<SeriesRow> parse_series_csv(const std::string& text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

// Standalone SVG. Each polyline carries a data-values attribute listing its
// points as "x,y" pairs in format17 rendering.
std::string svg_plot(const PlotSpec& spec);
std::string energy_plot(const std::vector<SeriesRow>& rows);
std::string psi_plot(const std::vector<double>& radii, const std::vector<double>& psi_values);
std::string limit_energy_plot(const std::vector<double>& alphas, const std::vector<double>& energies);
std::string tree_plot(const BubbleTree& tree);

nlohmann::json to_json(const BubbleTree& tree);
nlohmann::json to_json(const ConcentrationReport& report);
nlohmann::json to_json(const EnergyReport& report);

}  // namespace suflow
