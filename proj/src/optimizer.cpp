// SPDX-License-Identifier: Apache-2.0
#include "copess/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace copess::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool map_less(const sensing::StiffnessMap& a, const sensing::StiffnessMap& b) {
  return std::lexicographical_compare(a.density.begin(), a.density.end(),
                                      b.density.begin(), b.density.end());
}

double distance_to_cell_region(const sensing::CoilArraySpec& array, int cell,
                               double x, double y) {
  const int row = cell / array.cols;
  const int col = cell % array.cols;
  const double x0 = col * array.pitch_mm, x1 = (col + 1) * array.pitch_mm;
  const double y0 = row * array.pitch_mm, y1 = (row + 1) * array.pitch_mm;
  const double dx = std::max({x0 - x, 0.0, x - x1});
  const double dy = std::max({y0 - y, 0.0, y - y1});
  return std::hypot(dx, dy);
}

} // namespace

void GuidanceGoal::validate() const {
  auto check_cell = [](int cell) {
    if (cell < 0 || cell >= sensing::kCellCount)
      throw ValidationError("goal cell index off the grid");
  };
  if (kind == GoalKind::StopInCell) check_cell(target_cell);
  if (kind == GoalKind::Corridor) {
    if (corridor_cells.empty())
      throw ValidationError("corridor goal needs at least one cell");
    for (int c : corridor_cells) check_cell(c);
  }
  if (kind == GoalKind::MaxExitSpeed && speed_limit_mm_s < 0.0)
    throw ValidationError("exit speed limit must be non-negative");
  if (objective_weight < 0.0 || effort_weight < 0.0)
    throw ValidationError("goal weights must be non-negative");
}

bool is_contiguous(const sensing::StiffnessMap& map) {
  std::array<bool, sensing::kCellCount> seen{};
  for (int start = 0; start < sensing::kCellCount; ++start) {
    if (seen[static_cast<size_t>(start)]) continue;
    // Flood the start cell's density; any later unseen cell with the same
    // density belongs to a second region.
    const double rho = map.at_cell(start);
    for (int c = 0; c < start; ++c)
      if (map.at_cell(c) == rho) return false;
    std::vector<int> stack{start};
    seen[static_cast<size_t>(start)] = true;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int row = c / sensing::kCols, col = c % sensing::kCols;
      const int neighbors[4] = {
          col > 0 ? c - 1 : -1, col + 1 < sensing::kCols ? c + 1 : -1,
          row > 0 ? c - sensing::kCols : -1,
          row + 1 < sensing::kRows ? c + sensing::kCols : -1};
      for (int nb : neighbors) {
        if (nb < 0 || seen[static_cast<size_t>(nb)]) continue;
        if (map.at_cell(nb) != rho) continue;
        seen[static_cast<size_t>(nb)] = true;
        stack.push_back(nb);
      }
    }
  }
  return true;
}

std::vector<sensing::StiffnessMap> enumerate_space(const MapSpace& space) {
  if (space.densities.empty())
    throw ValidationError("map space needs at least one density");
  for (double rho : space.densities) {
    lattice::LatticeSpec spec;
    spec.relative_density = rho;
    const auto report = lattice::check_printability(spec);
    if (!report.printable)
      throw ValidationError("map space density fails printability: " +
                            report.violations.front());
  }
  std::vector<double> densities = space.densities;
  std::sort(densities.begin(), densities.end());

  std::vector<sensing::StiffnessMap> out;
  switch (space.kind) {
    case MapSpace::Kind::Uniform:
      for (double rho : densities)
        out.push_back(sensing::StiffnessMap::uniform(rho));
      break;
    case MapSpace::Kind::HalfTile:
      for (double left : densities)
        for (double right : densities)
          for (int boundary = 1; boundary < sensing::kCols; ++boundary) {
            auto map = sensing::StiffnessMap::half_tile(left, right, boundary);
            if (left == right && boundary > 1) continue; // duplicate uniform
            out.push_back(map);
          }
      break;
    case MapSpace::Kind::ColumnBands: {
      const size_t k = densities.size();
      size_t total = 1;
      for (int c = 0; c < sensing::kCols; ++c) total *= k;
      for (size_t code = 0; code < total; ++code) {
        sensing::StiffnessMap map;
        size_t rem = code;
        for (int col = 0; col < sensing::kCols; ++col) {
          const double rho = densities[rem % k];
          rem /= k;
          for (int row = 0; row < sensing::kRows; ++row)
            map.density[static_cast<size_t>(row * sensing::kCols + col)] = rho;
        }
        out.push_back(map);
      }
      break;
    }
    case MapSpace::Kind::Free:
      throw ValidationError("free map space is not enumerable");
  }
  if (space.require_contiguity) {
    std::erase_if(out, [](const sensing::StiffnessMap& m) {
      return !is_contiguous(m);
    });
  }
  std::sort(out.begin(), out.end(), map_less);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) {
                          return a.density == b.density;
                        }),
            out.end());
  if (out.empty()) throw ValidationError("empty feasible map space");
  return out;
}

Evaluation evaluate(const sensing::StiffnessMap& candidate,
                    const dynamics::Scenario& scenario_template,
                    const GuidanceGoal& goal,
                    const lattice::CalibrationSet& calibration,
                    const dynamics::FrictionModel& friction) {
  goal.validate();
  dynamics::Scenario scenario = scenario_template;
  scenario.map = candidate;

  dynamics::SimulationResult run;
  try {
    run = dynamics::simulate(scenario, calibration, friction);
  } catch (const DensificationError& e) {
    return {kInf, false, e.what()};
  }
  for (const auto& ev : run.events)
    if (ev.kind == dynamics::SimEvent::Kind::Densification)
      return {kInf, false, "densification at cell " + std::to_string(ev.cell)};

  const sensing::CoilArraySpec array;
  bool exited = false;
  double exit_speed = 0.0;
  for (const auto& ev : run.events) {
    if (ev.kind == dynamics::SimEvent::Kind::OffEdge) {
      exited = true;
      exit_speed = std::hypot(run.final_state.vx_mm_s, run.final_state.vy_mm_s);
    }
  }

  double objective = 0.0;
  switch (goal.kind) {
    case GoalKind::StopInCell: {
      const auto [tx, ty] = array.center(goal.target_cell);
      objective = std::hypot(run.final_state.x_mm - tx, run.final_state.y_mm - ty);
      // Still moving (or gone) at the end counts against a stop goal.
      objective += std::hypot(run.final_state.vx_mm_s, run.final_state.vy_mm_s);
      break;
    }
    case GoalKind::MaxExitSpeed:
      objective = exited ? std::max(0.0, exit_speed - goal.speed_limit_mm_s) : 0.0;
      break;
    case GoalKind::Corridor: {
      double integral = 0.0;
      double prev_t = run.trajectory.empty() ? 0.0 : run.trajectory.front().t_s;
      for (const auto& row : run.trajectory) {
        double dmin = kInf;
        for (int cell : goal.corridor_cells)
          dmin = std::min(dmin,
                          distance_to_cell_region(array, cell, row.x_mm, row.y_mm));
        integral += dmin * (row.t_s - prev_t);
        prev_t = row.t_s;
      }
      objective = integral;
      break;
    }
  }

  double cost = goal.objective_weight * objective;
  if (goal.effort_weight > 0.0) {
    cost += goal.effort_weight *
            dynamics::min_initiation_tilt_deg(candidate, friction,
                                              scenario_template.initial.x_mm,
                                              scenario_template.initial.y_mm);
  }
  return {cost, true, ""};
}

std::vector<Evaluation> evaluate_batch(
    const std::vector<sensing::StiffnessMap>& candidates,
    const dynamics::Scenario& scenario_template, const GuidanceGoal& goal,
    const lattice::CalibrationSet& calibration,
    const dynamics::FrictionModel& friction, bool parallel) {
  std::vector<Evaluation> out(candidates.size());
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long i = 0; i < static_cast<long long>(candidates.size()); ++i)
      out[static_cast<size_t>(i)] =
          evaluate(candidates[static_cast<size_t>(i)], scenario_template, goal,
                   calibration, friction);
  } else {
    for (size_t i = 0; i < candidates.size(); ++i)
      out[i] = evaluate(candidates[i], scenario_template, goal, calibration,
                        friction);
  }
  return out;
}

namespace {

// Order-independent incumbent selection: lower cost wins, ties go to the
// lexicographically smaller map.
void consider(const sensing::StiffnessMap& map, double cost,
              sensing::StiffnessMap& best_map, double& best_cost,
              bool& have_best) {
  if (!have_best || cost < best_cost ||
      (cost == best_cost && map_less(map, best_map))) {
    best_map = map;
    best_cost = cost;
    have_best = true;
  }
}

} // namespace

OptimizeResult optimize(const GuidanceGoal& goal,
                        const dynamics::Scenario& scenario_template,
                        const MapSpace& space, int budget, std::uint64_t seed,
                        const lattice::CalibrationSet& calibration,
                        const dynamics::FrictionModel& friction,
                        bool parallel) {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  goal.validate();

  OptimizeResult result;
  bool have_best = false;

  const bool enumerable = space.kind != MapSpace::Kind::Free;
  if (enumerable) {
    const auto candidates = enumerate_space(space);
    if (static_cast<int>(candidates.size()) <= budget) {
      const auto evals = evaluate_batch(candidates, scenario_template, goal,
                                        calibration, friction, parallel);
      for (size_t i = 0; i < candidates.size(); ++i) {
        result.cost_trace.push_back(evals[i].cost);
        consider(candidates[i], evals[i].cost, result.best_map,
                 result.best_cost, have_best);
      }
      result.exhaustive = true;
      dynamics::Scenario best_scn = scenario_template;
      best_scn.map = result.best_map;
      result.best_run = dynamics::simulate(best_scn, calibration, friction);
      return result;
    }
  }

  // Greedy single-cell-flip local search, deterministic restarts from seed.
  std::vector<double> densities = space.densities;
  std::sort(densities.begin(), densities.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, densities.size() - 1);

  auto random_candidate = [&]() {
    for (int attempt = 0; attempt < 64; ++attempt) {
      sensing::StiffnessMap map;
      for (auto& rho : map.density) rho = densities[pick(rng)];
      if (!space.require_contiguity || is_contiguous(map)) return map;
    }
    return sensing::StiffnessMap::uniform(densities.front());
  };

  int evals_used = 0;
  while (evals_used < budget) {
    sensing::StiffnessMap current = random_candidate();
    auto ev = evaluate(current, scenario_template, goal, calibration, friction);
    ++evals_used;
    result.cost_trace.push_back(ev.cost);
    double current_cost = ev.cost;
    consider(current, current_cost, result.best_map, result.best_cost, have_best);

    bool improved = true;
    while (improved && evals_used < budget) {
      improved = false;
      std::vector<sensing::StiffnessMap> neighbors;
      for (int cell = 0; cell < sensing::kCellCount; ++cell) {
        for (double rho : densities) {
          if (rho == current.at_cell(cell)) continue;
          sensing::StiffnessMap nb = current;
          nb.density[static_cast<size_t>(cell)] = rho;
          if (space.require_contiguity && !is_contiguous(nb)) continue;
          neighbors.push_back(nb);
        }
      }
      if (neighbors.empty()) break;
      if (static_cast<int>(neighbors.size()) > budget - evals_used)
        neighbors.resize(static_cast<size_t>(budget - evals_used));
      const auto evs = evaluate_batch(neighbors, scenario_template, goal,
                                      calibration, friction, parallel);
      size_t best_nb = 0;
      for (size_t i = 0; i < evs.size(); ++i) {
        result.cost_trace.push_back(evs[i].cost);
        if (evs[i].cost < evs[best_nb].cost) best_nb = i; // lowest index wins ties
      }
      evals_used += static_cast<int>(evs.size());
      if (evs[best_nb].cost < current_cost) {
        current = neighbors[best_nb];
        current_cost = evs[best_nb].cost;
        consider(current, current_cost, result.best_map, result.best_cost,
                 have_best);
        improved = true;
      }
    }
  }

  if (!have_best) throw ValidationError("empty feasible map space");
  dynamics::Scenario best_scn = scenario_template;
  best_scn.map = result.best_map;
  try {
    result.best_run = dynamics::simulate(best_scn, calibration, friction);
  } catch (const DensificationError&) {
    // infeasible incumbent: keep the cost trace, leave the run empty
  }
  return result;
}

std::array<double, sensing::kCellCount> tilt_threshold_profile(
    const sensing::StiffnessMap& map, const dynamics::FrictionModel& friction) {
  std::array<double, sensing::kCellCount> out{};
  for (int cell = 0; cell < sensing::kCellCount; ++cell)
    out[static_cast<size_t>(cell)] =
        std::atan(friction.mu_s(map.at_cell(cell))) * 180.0 / std::numbers::pi;
  return out;
}

} // namespace copess::optimizer
