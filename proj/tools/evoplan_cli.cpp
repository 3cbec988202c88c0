// Command-line front end: plan a single scenario, sweep a parameter axis, or
// validate a config file. Exit code 0 on success, 1 with a diagnostic line on
// stderr for any error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evoplan/evoplan.hpp"

namespace {

void print_plan(const char* mode, const evoplan::AllocationPlan& plan) {
  using evoplan::format_number;
  std::cout << "mode = " << mode << '\n';
  std::cout << "map_joint = " << format_number(plan.map_joint) << '\n';
  std::cout << "map_cloud = " << format_number(plan.map_cloud) << '\n';
  std::cout << "map_edge = " << format_number(plan.map_edge) << '\n';
  std::cout << "beta = " << format_number(plan.beta) << '\n';
  std::cout << "rho = " << format_number(plan.quant.rho) << '\n';
  std::cout << "b_up_hz = " << format_number(plan.b_up_hz) << '\n';
  std::cout << "b_down_hz = " << format_number(plan.b_down_hz) << '\n';
  std::cout << "m_update_bps = " << format_number(plan.m_update_bps) << '\n';
  std::cout << "rate_feature_bps = " << format_number(plan.rate_feature_bps) << '\n';
  std::cout << "rate_data_bps = " << format_number(plan.rate_data_bps) << '\n';
  std::cout << "avg_bits_per_pixel = " << format_number(plan.quant.avg_bits) << '\n';
  if (!plan.quant.mix.empty()) {
    std::cout << "mix =";
    for (const auto& a : plan.quant.mix) {
      std::cout << ' ' << format_number(a.frames_per_second) << "x"
                << format_number(a.bits_per_pixel) << "bpp";
    }
    std::cout << '\n';
  }
}

void print_scenario(const evoplan::Scenario& sc) {
  using evoplan::format_number;
  std::cout << "n_frames = " << format_number(sc.n_frames) << '\n';
  std::cout << "pixels = " << format_number(sc.pixels) << '\n';
  std::cout << "raw_bits = " << format_number(sc.raw_bits) << '\n';
  std::cout << "feature_bits = " << format_number(sc.feature_bits) << '\n';
  std::cout << "bandwidth_hz = " << format_number(sc.bandwidth_hz) << '\n';
  std::cout << "se_up = " << format_number(sc.se_up) << '\n';
  std::cout << "se_down = " << format_number(sc.se_down) << '\n';
  std::cout << "m_min_bps = " << format_number(sc.update_min_bps()) << '\n';
  std::cout << "m_max_bps = " << format_number(sc.update_max_bps()) << '\n';
  std::cout << "data_rate_bps = " << format_number(sc.data_rate_bps()) << '\n';
  std::cout << "ladder =";
  for (double v : sc.ladder.levels()) std::cout << ' ' << format_number(v);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cloud inference planner: task split, bandwidth split, residual-data "
               "quantization, and model-update scheduling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode = "solve";
  std::string axis_name = "bandwidth";
  std::vector<double> values;
  std::string out_path;
  std::string plot_path;
  bool with_oracle = false;
  evoplan::SolverSettings settings;
  evoplan::OracleGrid grid;

  auto* plan_cmd = app.add_subcommand("plan", "Optimize a single scenario and print the plan");
  plan_cmd->add_option("--config", config_path, "Scenario config file")->required();
  plan_cmd->add_option("--mode", mode, "solve | cloud-only | edge-only | oracle")
      ->check(CLI::IsMember({"solve", "cloud-only", "edge-only", "oracle"}));
  plan_cmd->add_option("--b-up-steps", settings.b_up_steps, "Outer uplink grid points");
  plan_cmd->add_option("--beta-tol", settings.beta_tol, "Inner search tolerance on beta");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one axis and emit CSV");
  sweep_cmd->add_option("--config", config_path, "Scenario config file")->required();
  sweep_cmd->add_option("--axis", axis_name,
                        "bandwidth | frames_per_second | se_up | se_down | model_config")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_flag("--oracle", with_oracle, "Also run the exhaustive-search baseline");
  sweep_cmd->add_option("--out", out_path, "Output CSV path")->required();
  sweep_cmd->add_option("--plot", plot_path, "Optional SVG chart path");
  sweep_cmd->add_option("--b-up-steps", settings.b_up_steps, "Outer uplink grid points");
  sweep_cmd->add_option("--beta-tol", settings.beta_tol, "Inner search tolerance on beta");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and sanity-check a config file");
  validate_cmd->add_option("--config", config_path, "Scenario config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const evoplan::LoadedConfig cfg = evoplan::load_config(config_path);

    if (validate_cmd->parsed()) {
      print_scenario(cfg.scenario);
      std::cout << "model_configs = " << cfg.model_configs.size() << '\n';
      std::cout << "ok\n";
      return 0;
    }

    if (plan_cmd->parsed()) {
      if (mode == "solve") {
        print_plan(mode.c_str(), evoplan::solve(cfg.scenario, settings));
      } else if (mode == "cloud-only") {
        print_plan(mode.c_str(), evoplan::solve_cloud_only(cfg.scenario));
      } else if (mode == "edge-only") {
        print_plan(mode.c_str(), evoplan::solve_edge_only(cfg.scenario));
      } else {
        std::cout << "candidates = " << grid.combination_count(cfg.scenario) << '\n';
        print_plan(mode.c_str(), evoplan::exhaustive_search(cfg.scenario, grid));
      }
      return 0;
    }

    // sweep
    evoplan::SweepSpec spec;
    spec.axis = evoplan::parse_axis(axis_name);
    spec.values = values;
    spec.with_oracle = with_oracle;
    const auto records = evoplan::run_sweep(cfg, spec, settings, grid);
    evoplan::emit_csv_file(records, out_path);
    if (!plot_path.empty()) evoplan::emit_plot(records, plot_path);
    for (const auto& rec : records) {
      if (!rec.note.empty()) {
        std::cerr << "note: axis " << evoplan::format_number(rec.axis_value) << ": " << rec.note
                  << '\n';
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
