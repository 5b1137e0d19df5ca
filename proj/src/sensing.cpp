// SPDX-License-Identifier: Apache-2.0
#include "copess/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace copess::sensing {

std::pair<double, double> CoilArraySpec::center(int cell) const {
  const int row = cell / cols;
  const int col = cell % cols;
  return {(col + 0.5) * pitch_mm, (row + 0.5) * pitch_mm};
}

int CoilArraySpec::cell_at(double x_mm, double y_mm) const {
  const int col = std::clamp(static_cast<int>(std::floor(x_mm / pitch_mm)), 0, cols - 1);
  const int row = std::clamp(static_cast<int>(std::floor(y_mm / pitch_mm)), 0, rows - 1);
  return row * cols + col;
}

GapResponse::GapResponse(const lattice::CalibrationSet& calibration)
    : calibration_(&calibration) {}

double GapResponse::slope_uh_per_mm(double rho) const {
  return calibration_->sensitivity(rho) * calibration_->f_op(rho) /
         lattice::kDensificationDispMm;
}

InductanceReading GapResponse::delta_inductance(double rho,
                                                double compression_mm) const {
  if (compression_mm < 0.0)
    throw ValidationError("compression must be non-negative");
  const double slope = slope_uh_per_mm(rho);
  if (compression_mm > kLinearSpanMm)
    return {slope * kLinearSpanMm, true};
  return {slope * compression_mm, false};
}

StiffnessMap StiffnessMap::uniform(double rho) {
  StiffnessMap map;
  map.density.fill(rho);
  return map;
}

StiffnessMap StiffnessMap::half_tile(double left_rho, double right_rho,
                                     int boundary_col) {
  StiffnessMap map;
  for (int cell = 0; cell < kCellCount; ++cell)
    map.density[static_cast<size_t>(cell)] =
        (cell % kCols) < boundary_col ? left_rho : right_rho;
  return map;
}

SensorFrame simulate_frame(const CoilArraySpec& array, const StiffnessMap& map,
                           const std::array<double, kCellCount>& load_field,
                           double t_s,
                           const lattice::CalibrationSet& calibration) {
  SensorFrame frame;
  frame.timestamp_s = t_s;
  const GapResponse response(calibration);
  for (int cell = 0; cell < array.rows * array.cols; ++cell) {
    const double load = load_field[static_cast<size_t>(cell)];
    if (load < 0.0)
      throw ValidationError("negative cell load at cell " + std::to_string(cell));
    if (load == 0.0) continue;
    const auto model = calibration.model_for(map.at_cell(cell));
    if (load > model.operational_force_range() + 1e-12)
      throw DensificationError(
          "load " + std::to_string(load) + " N exceeds F_op at cell " +
              std::to_string(cell),
          cell);
    const double d = model.displacement_for_force(load);
    frame.delta_l_uh[static_cast<size_t>(cell)] =
        response.delta_inductance(map.at_cell(cell), d).delta_l_uh;
  }
  return frame;
}

double crosstalk_response_uh(int active_cell, int neighbor_cell) {
  if (active_cell == neighbor_cell)
    throw ValidationError("crosstalk requires two distinct cells");
  return 0.0;
}

} // namespace copess::sensing
