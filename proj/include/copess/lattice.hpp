// SPDX-License-Identifier: Apache-2.0
//
// Quasi-static mechanics of gyroid lattice pads: force-displacement with
// post-linear stiffening, closed hysteresis loops, and density scaling laws
// fit to measured anchor points.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "copess/errors.hpp"

namespace copess::lattice {

enum class Topology { Gyroid, SchwarzD, XCellStrut };

std::string to_string(Topology t);
std::optional<Topology> topology_from_string(const std::string& s);

// Printability window for the SLA elastic resin.
inline constexpr double kMinRelativeDensity = 0.07;
inline constexpr double kMaxRelativeDensity = 0.30;
inline constexpr double kMinCellSizeMm = 2.2;
inline constexpr double kMaxCellSizeMm = 4.0;

inline constexpr double kDefaultThicknessMm = 12.0;
inline constexpr double kDefaultPlanarSideMm = 37.5;
inline constexpr double kLinearRegionEndMm = 2.0;      // effective-stiffness window
inline constexpr double kDensificationDispMm = 6.0;    // 50 % of 12 mm thickness
inline constexpr double kDefaultStiffeningExponent = 3.0;

struct LatticeSpec {
  Topology topology = Topology::Gyroid;
  double cell_size_mm = 3.0;
  double relative_density = 0.10;
  double thickness_mm = kDefaultThicknessMm;
  double planar_side_mm = kDefaultPlanarSideMm;
};

struct PrintabilityReport {
  bool printable = true;
  std::vector<std::string> violations;
};

/// Lists every violated printability constraint; never throws.
PrintabilityReport check_printability(const LatticeSpec& spec);

/// Loading branch: F(d) = k0*d on [0, d_lin], then k0*d + c*(d - d_lin)^p
/// with c solved so that F(densification_disp) = f_op exactly.
class MechanicalModel {
public:
  MechanicalModel(double k0_n_per_mm, double f_op_n, double hysteresis_ratio,
                  double stiffening_exponent = kDefaultStiffeningExponent,
                  double d_lin_mm = kLinearRegionEndMm,
                  double densification_disp_mm = kDensificationDispMm);

  double k0() const { return k0_; }
  double f_op() const { return f_op_; }
  double d_lin() const { return d_lin_; }
  double densification_disp() const { return d_dens_; }
  double hysteresis_ratio() const { return hysteresis_; }
  double stiffening_exponent() const { return exponent_; }
  double stiffening_coefficient() const { return c_; }

  /// Throws OutOfRangeError outside [0, densification_disp].
  double loading_force(double d_mm) const;

  /// Closed hysteresis loop: F_unload(d) = F_load(d) * (1 - h*w(d, d_peak))
  /// with the bump weight scaled so the peak force gap equals
  /// h * F_load(d_peak). Equals the loading branch at d = 0 and d = d_peak.
  double unloading_force(double d_mm, double d_peak_mm) const;

  /// F_op, the loading force at the densification displacement.
  double operational_force_range() const;

  /// Inverse of loading_force by bisection (tolerance 1e-9 N, cap 200).
  /// Throws DensificationError for loads above F_op.
  double displacement_for_force(double force_n) const;

private:
  double peak_gap_scale(double d_peak_mm) const;

  double k0_;
  double f_op_;
  double hysteresis_;
  double exponent_;
  double d_lin_;
  double d_dens_;
  double c_;
};

struct Anchor {
  double relative_density;
  double value;
};

/// Gibson-Ashby style power law q(rho) = a*rho^b, least-squares in log-log.
/// Evaluation applies a piecewise-linear log-residual correction so every
/// anchor is reproduced exactly; outside the anchor range the fitted
/// exponent extrapolates.
class DensityScalingLaw {
public:
  static DensityScalingLaw fit(std::vector<Anchor> anchors);

  double coefficient() const { return a_; }
  double exponent() const { return b_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }
  /// log-space residual per anchor, same order as anchors().
  const std::vector<double>& residuals() const { return residuals_; }

  /// Anchor-exact evaluation (fit + residual interpolation).
  double at(double relative_density) const;
  /// Raw fitted power law, no residual correction.
  double fitted(double relative_density) const;

private:
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<Anchor> anchors_;   // sorted by density
  std::vector<double> residuals_; // log-space, per sorted anchor
};

struct TableAnchor {
  double relative_density;
  double k0_n_per_mm;
  double f_op_n;
  double sensitivity_uh_per_n;
  double hysteresis_pct;
};

/// Measured anchors for the 3 mm gyroid at 7/10/20 % relative density.
const std::vector<TableAnchor>& builtin_anchors();

/// Force-range multiplier vs cell size, piecewise linear between the
/// measured anchors {2.2 -> 1/1.70, 3.0 -> 1.0, 4.0 -> 1/1.35}.
double cell_size_force_factor(double cell_size_mm);

/// Calibrated scaling laws for all four Table-style quantities.
class CalibrationSet {
public:
  static CalibrationSet from_anchors(const std::vector<TableAnchor>& anchors);
  static CalibrationSet builtin();

  const DensityScalingLaw& k0_law() const { return k0_; }
  const DensityScalingLaw& f_op_law() const { return f_op_; }
  const DensityScalingLaw& sensitivity_law() const { return sensitivity_; }
  const DensityScalingLaw& hysteresis_law() const { return hysteresis_; }
  const std::vector<TableAnchor>& anchors() const { return anchors_; }

  double k0(double rho) const { return k0_.at(rho); }
  double f_op(double rho) const { return f_op_.at(rho); }
  double sensitivity(double rho) const { return sensitivity_.at(rho); }
  double hysteresis_pct(double rho) const { return hysteresis_.at(rho); }

  /// Mechanical model for a gyroid pad at the given density; cell sizes
  /// other than 3 mm scale the force range. Non-gyroid topologies have no
  /// calibration data and are rejected.
  MechanicalModel model_for(double relative_density, double cell_size_mm = 3.0,
                            Topology topology = Topology::Gyroid) const;

private:
  DensityScalingLaw k0_, f_op_, sensitivity_, hysteresis_;
  std::vector<TableAnchor> anchors_;
};

struct CurveSample {
  double displacement_mm;
  double force_n;
};

/// Least-squares slope through the origin over samples with d <= 2 mm.
double effective_stiffness(const std::vector<CurveSample>& loading);

/// Max |F_load - F_unload| over the common grid, as a percentage of the
/// full-scale loading force. Branches must share the displacement grid.
double hysteresis_metric(const std::vector<CurveSample>& loading,
                         const std::vector<CurveSample>& unloading);

} // namespace copess::lattice
