// SPDX-License-Identifier: Apache-2.0
//
// copess: calibrate, simulate, and analyze the sensorized lattice surface.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "copess/scenario.hpp"

namespace fs = std::filesystem;
using namespace copess;

namespace {

fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("COPESS_OUT_DIR")) return env;
  return ".";
}

lattice::CalibrationSet load_calibration(const std::string& path,
                                         std::string& source) {
  if (path.empty()) {
    source = "built-in";
    return lattice::CalibrationSet::builtin();
  }
  source = path;
  return lattice::CalibrationSet::from_anchors(io::read_anchor_csv(path));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Simulator and analysis toolkit for a compliant inductively "
               "sensorized manipulation surface"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));

  std::string calibration_path;
  std::string out_flag;
  std::uint64_t seed = 0;
  app.add_option("--calibration", calibration_path,
                 "Anchor CSV overriding the built-in calibration data");
  app.add_option("--out", out_flag, "Output directory (or $COPESS_OUT_DIR)");
  app.add_option("--seed", seed, "Seed for seeded subcommands");

  auto* cmd_calibrate =
      app.add_subcommand("calibrate", "Fit scaling laws from anchor data");

  std::string scenario_path;
  auto* cmd_simulate =
      app.add_subcommand("simulate", "Run a scenario and write its logs");
  cmd_simulate->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();

  std::string disp_path, force_path, frames_path;
  auto* cmd_metrics = app.add_subcommand(
      "metrics", "Characterization metrics from cycle logs");
  cmd_metrics->add_option("--disp", disp_path, "Displacement CSV (t_s,disp_mm)")
      ->required();
  cmd_metrics->add_option("--force", force_path, "Force CSV (t_s,force_n)")
      ->required();
  cmd_metrics->add_option("--frames", frames_path, "Frames CSV (t_s,c00..c33)")
      ->required();

  std::string loc_frames_path;
  double noise_floor = pipeline::kDefaultNoiseFloorUh;
  auto* cmd_localize =
      app.add_subcommand("localize", "Localization track from a frame log");
  cmd_localize->add_option("--frames", loc_frames_path, "Frames CSV")->required();
  cmd_localize->add_option("--noise-floor", noise_floor, "Noise floor, uH");

  std::string opt_scenario_path;
  bool opt_serial = false;
  auto* cmd_optimize = app.add_subcommand(
      "optimize", "Search stiffness layouts for a guidance goal");
  cmd_optimize->add_option("scenario", opt_scenario_path,
                           "Scenario JSON with a 'goal' section")
      ->required();
  cmd_optimize->add_flag("--serial", opt_serial,
                         "Use the serial reference evaluation path");

  std::vector<double> sweep_densities = {0.07, 0.10, 0.20};
  double sweep_v0 = 500.0;
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "Flat-tile stopping-distance sweep over uniform densities");
  cmd_sweep->add_option("--densities", sweep_densities, "Relative densities");
  cmd_sweep->add_option("--v0", sweep_v0, "Initial impulse, mm/s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);
  std::string calibration_source;
  const auto calibration = load_calibration(calibration_path, calibration_source);
  const auto friction = dynamics::FrictionModel::builtin();

  if (cmd_calibrate->parsed()) {
    write_text(out_dir / "laws.json", io::calibration_to_json(calibration));
    std::cout << io::calibration_to_json(calibration) << "\n";
    return 0;
  }

  if (cmd_simulate->parsed()) {
    auto file = io::load_scenario(scenario_path);
    if (seed != 0) file.scenario.seed = seed;
    io::RunManifest manifest;
    manifest.scenario_digest = io::scenario_digest(file);
    manifest.calibration_source = calibration_source;
    manifest.seed = file.scenario.seed;
    write_text(out_dir / "scenario_resolved.json", io::scenario_to_json(file));
    manifest.outputs.push_back((out_dir / "scenario_resolved.json").string());
    if (file.mode == io::RunMode::Cycle) {
      const auto log = dynamics::simulate_cycle(file.cycle, calibration);
      io::write_series_csv(out_dir / "disp.csv", "disp_mm", log.t_s,
                           log.displacement_mm);
      io::write_series_csv(out_dir / "force.csv", "force_n", log.t_s,
                           log.force_n);
      io::write_frames_csv(out_dir / "frames.csv", log.frames);
      for (const char* name : {"disp.csv", "force.csv", "frames.csv"})
        manifest.outputs.push_back((out_dir / name).string());
    } else {
      const auto result = dynamics::simulate(file.scenario, calibration, friction);
      io::write_trajectory_csv(out_dir / "trajectory.csv", result.trajectory);
      io::write_frames_csv(out_dir / "frames.csv", result.frames);
      for (const char* name : {"trajectory.csv", "frames.csv"})
        manifest.outputs.push_back((out_dir / name).string());
      for (const auto& ev : result.events)
        std::cerr << "event t=" << ev.t_s << "s: " << ev.detail << "\n";
    }
    io::write_manifest(out_dir / "manifest.json", manifest);
    return 0;
  }

  if (cmd_metrics->parsed()) {
    const auto disp = io::read_series_csv(disp_path);
    const auto force = io::read_series_csv(force_path);
    const auto frames = io::read_frames_csv(frames_path);
    const auto metrics = pipeline::characterize(disp, force, frames);
    const std::string text = io::metrics_to_json(metrics);
    write_text(out_dir / "metrics.json", text);
    std::cout << text << "\n";
    return 0;
  }

  if (cmd_localize->parsed()) {
    const auto frames_stream = io::read_frames_csv(loc_frames_path);
    const sensing::CoilArraySpec array;
    std::vector<pipeline::LocalizationEstimate> track;
    for (const auto& s : frames_stream.samples) {
      sensing::SensorFrame frame;
      frame.timestamp_s = s.t_s;
      for (int c = 0; c < sensing::kCellCount; ++c)
        frame.delta_l_uh[static_cast<size_t>(c)] = s.values[static_cast<size_t>(c)];
      track.push_back(pipeline::localize(frame, array, noise_floor));
    }
    io::write_track_csv(out_dir / "track.csv", track);
    return 0;
  }

  if (cmd_optimize->parsed()) {
    auto file = io::load_scenario(opt_scenario_path);
    if (!file.goal)
      throw ValidationError("optimize requires a 'goal' section in the scenario");
    const auto result = optimizer::optimize(
        file.goal->goal, file.scenario, file.goal->space, file.goal->budget,
        seed != 0 ? seed : file.scenario.seed, calibration, friction,
        !opt_serial);
    write_text(out_dir / "best_map.json", io::map_to_json(result.best_map));
    {
      std::ofstream trace(out_dir / "cost_trace.csv");
      trace << "eval_idx,cost\n";
      for (size_t i = 0; i < result.cost_trace.size(); ++i)
        trace << i << ',' << result.cost_trace[i] << '\n';
    }
    io::write_trajectory_csv(out_dir / "best_trajectory.csv",
                             result.best_run.trajectory);
    io::RunManifest manifest;
    manifest.scenario_digest = io::scenario_digest(file);
    manifest.calibration_source = calibration_source;
    manifest.seed = seed != 0 ? seed : file.scenario.seed;
    manifest.outputs = {(out_dir / "best_map.json").string(),
                        (out_dir / "cost_trace.csv").string(),
                        (out_dir / "best_trajectory.csv").string()};
    io::write_manifest(out_dir / "manifest.json", manifest);
    std::cout << "best cost " << result.best_cost
              << (result.exhaustive ? " (exhaustive)" : " (local search)") << "\n";
    return 0;
  }

  if (cmd_sweep->parsed()) {
    std::ofstream out(out_dir / "sweep.csv");
    out << "relative_density,v0_mm_s,stop_distance_mm,exited\n";
    for (double rho : sweep_densities) {
      dynamics::Scenario scn;
      scn.map = sensing::StiffnessMap::uniform(rho);
      scn.schedule = dynamics::TiltSchedule({{0.0, 0.0}});
      scn.initial.x_mm = 10.0;
      scn.initial.y_mm = 56.25;
      scn.initial.vx_mm_s = sweep_v0;
      scn.duration_s = 20.0;
      const auto result = dynamics::simulate(scn, calibration, friction);
      bool exited = false;
      for (const auto& ev : result.events)
        if (ev.kind == dynamics::SimEvent::Kind::OffEdge) exited = true;
      out << rho << ',' << sweep_v0 << ','
          << result.final_state.x_mm - scn.initial.x_mm << ','
          << (exited ? 1 : 0) << '\n';
    }
    std::cout << "wrote " << (out_dir / "sweep.csv").string() << "\n";
    return 0;
  }

  return 64;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
