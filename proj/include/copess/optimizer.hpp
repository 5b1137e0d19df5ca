// SPDX-License-Identifier: Apache-2.0
//
// Simulator-in-the-loop search over stiffness layouts for passive guidance
// goals. Candidate evaluations are independent pure calls; the OpenMP path
// and the serial reference path must produce identical results.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copess/dynamics.hpp"
#include "copess/sensing.hpp"

namespace copess::optimizer {

enum class GoalKind { StopInCell, MaxExitSpeed, Corridor };

struct GuidanceGoal {
  GoalKind kind = GoalKind::StopInCell;
  int target_cell = 0;              // StopInCell
  double speed_limit_mm_s = 0.0;    // MaxExitSpeed
  std::vector<int> corridor_cells;  // Corridor
  double objective_weight = 1.0;
  double effort_weight = 0.0; // penalty per degree of initiation tilt

  void validate() const;
};

/// Candidate layout families over the calibrated density set.
struct MapSpace {
  enum class Kind { Uniform, HalfTile, ColumnBands, Free };
  Kind kind = Kind::ColumnBands;
  std::vector<double> densities = {0.07, 0.10, 0.20};
  bool require_contiguity = false;
};

/// True when the cells of each density value form one 4-connected region.
bool is_contiguous(const sensing::StiffnessMap& map);

/// All candidates of an enumerable family (Uniform, HalfTile, ColumnBands),
/// contiguity-filtered when requested. Free spaces are not enumerable.
std::vector<sensing::StiffnessMap> enumerate_space(const MapSpace& space);

struct Evaluation {
  double cost = 0.0;
  bool feasible = true;
  std::string reason; // set when infeasible (e.g. densification)
};

/// Deterministic cost of one candidate: weighted goal violations from a
/// simulation run plus the actuation-effort penalty. Densification during
/// the run yields an infinite cost with the reason recorded.
Evaluation evaluate(const sensing::StiffnessMap& candidate,
                    const dynamics::Scenario& scenario_template,
                    const GuidanceGoal& goal,
                    const lattice::CalibrationSet& calibration,
                    const dynamics::FrictionModel& friction);

/// Costs for a candidate batch, in input order. The parallel flag selects
/// the OpenMP kernel; the serial path is the reference for testing.
std::vector<Evaluation> evaluate_batch(
    const std::vector<sensing::StiffnessMap>& candidates,
    const dynamics::Scenario& scenario_template, const GuidanceGoal& goal,
    const lattice::CalibrationSet& calibration,
    const dynamics::FrictionModel& friction, bool parallel = true);

struct OptimizeResult {
  sensing::StiffnessMap best_map;
  double best_cost = 0.0;
  bool exhaustive = false;
  std::vector<double> cost_trace; // one entry per evaluation, in order
  dynamics::SimulationResult best_run;
};

/// Exhaustive enumeration when the constrained space fits in the budget,
/// otherwise greedy single-cell-flip local search with a deterministic
/// restart schedule from the seed. Ties break to the lexicographically
/// smallest density array. Results are independent of evaluation order.
OptimizeResult optimize(const GuidanceGoal& goal,
                        const dynamics::Scenario& scenario_template,
                        const MapSpace& space, int budget, std::uint64_t seed,
                        const lattice::CalibrationSet& calibration,
                        const dynamics::FrictionModel& friction,
                        bool parallel = true);

/// arctan(mu_s(rho)) per cell, degrees.
std::array<double, sensing::kCellCount> tilt_threshold_profile(
    const sensing::StiffnessMap& map, const dynamics::FrictionModel& friction);

} // namespace copess::optimizer
