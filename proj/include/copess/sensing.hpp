// SPDX-License-Identifier: Apache-2.0
//
// Empirical inductance model for the coil-target pair and synthetic
// 16-channel frame generation from a per-cell load field.
#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "copess/lattice.hpp"

namespace copess::sensing {

inline constexpr int kRows = 4;
inline constexpr int kCols = 4;
inline constexpr int kCellCount = kRows * kCols;
inline constexpr double kLinearSpanMm = 12.0;

struct CoilArraySpec {
  int rows = kRows;
  int cols = kCols;
  double coil_side_mm = 25.0;
  double pitch_mm = 37.5;

  double span_x_mm() const { return cols * pitch_mm; }
  double span_y_mm() const { return rows * pitch_mm; }
  /// Coil center for a row-major cell index (x along columns, y along rows).
  std::pair<double, double> center(int cell) const;
  /// Row-major cell index under a point; clamped to the grid.
  int cell_at(double x_mm, double y_mm) const;
};

struct SensorFrame {
  double timestamp_s = 0.0;
  std::array<double, kCellCount> delta_l_uh{}; // >= 0, change from baseline
};

struct InductanceReading {
  double delta_l_uh;
  bool saturated; // compression beyond the 12 mm linear span
};

/// Inductance-vs-compression law, linear over [0, 12] mm with a per-density
/// slope chosen so the average inductance-force slope over the operational
/// range reproduces the measured sensitivity exactly:
///   slope(rho) = S(rho) * F_op(rho) / 6 mm.
class GapResponse {
public:
  explicit GapResponse(const lattice::CalibrationSet& calibration);

  double slope_uh_per_mm(double relative_density) const;
  InductanceReading delta_inductance(double relative_density,
                                     double compression_mm) const;

private:
  const lattice::CalibrationSet* calibration_;
};

/// Per-cell relative density over the 4x4 tile, row-major.
struct StiffnessMap {
  std::array<double, kCellCount> density{};

  static StiffnessMap uniform(double rho);
  /// Columns [0, boundary_col) get left_rho, the rest right_rho.
  static StiffnessMap half_tile(double left_rho, double right_rho,
                                int boundary_col = 2);
  double at_cell(int cell) const { return density[static_cast<size_t>(cell)]; }
};

/// Synthesize one frame from a per-cell normal load field: each loaded cell
/// solves its compression from the local mechanical model, then maps it to
/// an inductance change. Crosstalk between cells is exactly zero.
/// Throws DensificationError (with the cell index) when a load exceeds the
/// local operational force range.
SensorFrame simulate_frame(const CoilArraySpec& array, const StiffnessMap& map,
                           const std::array<double, kCellCount>& load_field_n,
                           double t_s,
                           const lattice::CalibrationSet& calibration);

/// Measured EM isolation: a load on one cell induces no response on any
/// other. Same-cell queries are a contract violation.
double crosstalk_response_uh(int active_cell, int neighbor_cell);

} // namespace copess::sensing
