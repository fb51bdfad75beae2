// Command line driver: run, analyze, resume and plot.
// Exit status 0 on success, 1 on configuration or input errors, 2 on
// numerical failure (including a run stopped by blow-up).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "suflow/bubbletree.hpp"
#include "suflow/checkpoint.hpp"
#include "suflow/config.hpp"
#include "suflow/diagnostics.hpp"
#include "suflow/errors.hpp"
#include "suflow/report.hpp"
#include "suflow/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNumericalError = 2;

int report_outcome(const suflow::ScenarioReport& rep) {
  for (const auto& f : rep.files) std::cout << "wrote " << f << '\n';
  if (rep.numerical_failure) {
    std::cerr << "numerical failure: flow stopped by blow-up\n";
    return kNumericalError;
  }
  return kOk;
}

int analyze(const std::vector<std::string>& paths, double eps0, double eps1, double zoom,
            const std::string& out_dir) {
  nlohmann::json all = nlohmann::json::array();
  for (const auto& path : paths) {
    const suflow::Checkpoint c = suflow::read_checkpoint(path);
    const suflow::MapField& u = c.state.field;
    suflow::FlowParams params;
    params.alpha = c.alpha;
    params.r_scale = c.r_scale;
    nlohmann::json j;
    j["checkpoint"] = path;
    j["t"] = c.state.t;
    j["energy"] = suflow::to_json(
        suflow::energy_report(u, params, suflow::alpha_energy(u, params.alpha)));
    j["concentration"] =
        suflow::to_json(suflow::detect_concentration(u, eps0, suflow::default_scales(u.grid)));
    const suflow::BubbleTree tree = suflow::build_tree(u, eps1, eps1 / 6.0, {zoom});
    j["bubble_tree"] = suflow::to_json(tree);
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      const auto stem = std::filesystem::path(path).stem().string();
      suflow::write_text((std::filesystem::path(out_dir) / (stem + "_tree.svg")).string(),
                         suflow::tree_plot(tree));
    }
    all.push_back(j);
  }
  std::cout << all.dump(2) << '\n';
  return kOk;
}

int plot(const std::vector<std::string>& paths, const std::string& out_dir) {
  for (const auto& path : paths) {
    const auto rows = suflow::parse_series_csv(suflow::read_text(path));
    std::filesystem::path target = std::filesystem::path(path).replace_extension(".svg");
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      target = std::filesystem::path(out_dir) / target.filename();
    }
    suflow::write_text(target.string(), suflow::energy_plot(rows));
    std::cout << "wrote " << target.string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sacks-Uhlenbeck alpha-flow of torus maps into the 2-sphere"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a config file");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::vector<std::string> ckpts;
  double eps0 = 1.0, eps1 = 12.566370614359172, zoom = 32.0;
  std::string analyze_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Bubble tree and concentration of checkpoints");
  analyze_cmd->add_option("checkpoints", ckpts, "Checkpoint files")->required();
  analyze_cmd->add_option("--epsilon-0", eps0, "Concentration threshold");
  analyze_cmd->add_option("--epsilon-1", eps1, "Bubble energy threshold");
  analyze_cmd->add_option("--zoom", zoom, "Detection radius in bubble-scale units");
  analyze_cmd->add_option("--out", analyze_out, "Directory for tree plots");

  std::string resume_ckpt, resume_config;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a checkpointed state");
  resume_cmd->add_option("checkpoint", resume_ckpt, "Checkpoint file")->required();
  resume_cmd->add_option("config", resume_config, "Config file")->required();

  std::vector<std::string> csvs;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render energy plots from series CSV files");
  plot_cmd->add_option("csv", csvs, "Series CSV files")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory (default: next to each CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*run_cmd) return report_outcome(suflow::run_scenario(suflow::load_config(config_path)));
    if (*analyze_cmd) return analyze(ckpts, eps0, eps1, zoom, analyze_out);
    if (*resume_cmd) {
      const suflow::ScenarioConfig cfg = suflow::load_config(resume_config);
      return report_outcome(
          suflow::resume_scenario(suflow::read_checkpoint(resume_ckpt, cfg.R_M), cfg));
    }
    if (*plot_cmd) return plot(csvs, plot_out);
  } catch (const suflow::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const suflow::ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
