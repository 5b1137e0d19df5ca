// SPDX-License-Identifier: Apache-2.0
//
// Scenario files, calibration data, CSV log formats, and run manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "copess/dynamics.hpp"
#include "copess/optimizer.hpp"
#include "copess/pipeline.hpp"

namespace copess::io {

inline constexpr const char* kToolVersion = "0.1.0";

enum class RunMode { Guidance, Cycle };

struct GoalConfig {
  optimizer::GuidanceGoal goal;
  optimizer::MapSpace space;
  int budget = 200;
};

struct ScenarioFile {
  RunMode mode = RunMode::Guidance;
  dynamics::Scenario scenario;
  dynamics::CycleScenario cycle;
  std::optional<GoalConfig> goal;
};

/// Parse and validate a scenario JSON file. Validation reports every
/// violation at once. All defaults are filled in the returned value.
ScenarioFile load_scenario(const std::filesystem::path& path);
ScenarioFile parse_scenario_json(const std::string& text);

/// Scenario with all defaults resolved, serialized back to canonical JSON.
std::string scenario_to_json(const ScenarioFile& file);

/// FNV-1a 64 content hash of the canonical scenario JSON, hex encoded.
std::string scenario_digest(const ScenarioFile& file);

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string scenario_digest;
  std::string calibration_source; // "built-in" or a file path
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

// --- calibration data ---

/// Anchor CSV: header
/// relative_density,k0_n_per_mm,f_op_n,sensitivity_uh_per_n,hysteresis_pct
std::vector<lattice::TableAnchor> read_anchor_csv(
    const std::filesystem::path& path);
std::string calibration_to_json(const lattice::CalibrationSet& set);

// --- time series ---

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<dynamics::TrajectoryRow>& rows);
void write_frames_csv(const std::filesystem::path& path,
                      const std::vector<sensing::SensorFrame>& frames);
void write_series_csv(const std::filesystem::path& path,
                      const std::string& value_header,
                      const std::vector<double>& t_s,
                      const std::vector<double>& values);
void write_track_csv(const std::filesystem::path& path,
                     const std::vector<pipeline::LocalizationEstimate>& track);

/// Frames CSV (t_s,c00,...,c33) as a 16-channel stream.
pipeline::TimedStream read_frames_csv(const std::filesystem::path& path);
/// Two-column CSV (t_s,<value>) as a single-channel stream.
pipeline::TimedStream read_series_csv(const std::filesystem::path& path);

std::string metrics_to_json(const pipeline::CharacterizationMetrics& m);
std::string map_to_json(const sensing::StiffnessMap& map);

} // namespace copess::io
