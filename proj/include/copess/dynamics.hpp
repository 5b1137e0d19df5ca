// SPDX-License-Identifier: Apache-2.0
//
// Rigid-object motion on the tilting, stiffness-patterned tile:
// quasi-static indentation, stiction thresholds, density-dependent rolling
// resistance, and fixed-step deterministic integration.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "copess/lattice.hpp"
#include "copess/sensing.hpp"

namespace copess::dynamics {

inline constexpr double kGravityMmS2 = 9806.65;
inline constexpr double kGravityMS2 = 9.80665;
inline constexpr double kStictionVelocityEps = 0.1; // mm/s
inline constexpr double kDefaultTimestepS = 1e-3;
inline constexpr double kDefaultFrameHz = 20.0;

enum class FootprintKind { Point, Disc };
enum class ObjectKind { Rigid, Soft }; // metadata only
enum class Axis { X, Y };

struct ObjectSpec {
  double mass_kg = 0.5;
  FootprintKind footprint = FootprintKind::Disc;
  double footprint_radius_mm = 37.5; // used when footprint == Disc
  ObjectKind kind = ObjectKind::Rigid;
};

/// Piecewise-linear tilt angle vs time. Angles clamp to the end knots
/// outside the schedule span.
class TiltSchedule {
public:
  struct Knot {
    double t_s;
    double angle_deg;
  };

  TiltSchedule(std::vector<Knot> knots, Axis axis = Axis::X);
  /// The characterization profile: 0 -> +20 deg -> -20 deg at 0.2 deg/s.
  static TiltSchedule default_ramp(Axis axis = Axis::X);
  /// Single ramp from level to `amplitude_deg` at `rate_deg_s`.
  static TiltSchedule ramp_to(double amplitude_deg, double rate_deg_s = 0.2,
                              Axis axis = Axis::X);

  double angle_deg_at(double t_s) const;
  Axis axis() const { return axis_; }
  const std::vector<Knot>& knots() const { return knots_; }
  double end_time_s() const { return knots_.back().t_s; }

private:
  std::vector<Knot> knots_;
  Axis axis_;
};

struct FrictionTiltAnchor {
  double relative_density;
  double initiation_tilt_deg;
};

struct StoppingAnchor {
  double relative_density;
  double distance_mm;
};

/// Coulomb-type resistance with density-dependent coefficients.
/// mu_s(rho) = tan(initiation tilt) at the anchors, power-law between;
/// mu_k = r * mu_s with a single ratio fit to the stopping-distance anchors
/// at the given reference impulse.
class FrictionModel {
public:
  static FrictionModel calibrate(const std::vector<FrictionTiltAnchor>& tilts,
                                 const std::vector<StoppingAnchor>& stopping,
                                 double v0_mm_s);
  /// Calibration from the measured initiation tilts (5 deg at 20 %,
  /// 12.7 deg at 7 %) and stopping distances (75 mm at 7 %, 110 mm at 10 %)
  /// at the default 500 mm/s reference impulse.
  static FrictionModel builtin();

  double mu_s(double relative_density) const;
  double mu_k(double relative_density) const;
  double kinetic_ratio() const { return ratio_; }
  double reference_impulse_mm_s() const { return v0_ref_; }
  /// Closed-form flat-tile stopping distance v^2 / (2 g mu_k).
  double stopping_distance_mm(double relative_density, double v0_mm_s) const;
  const lattice::DensityScalingLaw& mu_s_law() const { return mu_s_law_; }

private:
  lattice::DensityScalingLaw mu_s_law_;
  double ratio_ = 1.0;
  double v0_ref_ = 0.0;
};

struct ObjectState {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double vx_mm_s = 0.0;
  double vy_mm_s = 0.0;
  double indentation_mm = 0.0;
  bool moving = false;
};

struct Scenario {
  ObjectSpec object;
  sensing::StiffnessMap map;
  TiltSchedule schedule = TiltSchedule::default_ramp();
  ObjectState initial;
  double dt_s = kDefaultTimestepS;
  double duration_s = 0.0; // 0 -> schedule end time
  double frame_hz = kDefaultFrameHz;
  std::uint64_t seed = 0; // reserved; dynamics are deterministic
};

struct TrajectoryRow {
  double t_s;
  double x_mm, y_mm;
  double vx_mm_s, vy_mm_s;
  double indentation_mm;
  double cell_density;
};

struct SimEvent {
  enum class Kind { OffEdge, Densification };
  Kind kind;
  double t_s;
  int cell; // densification cell, -1 otherwise
  std::string detail;
};

struct SimulationResult {
  std::vector<TrajectoryRow> trajectory; // one row per frame tick
  std::vector<sensing::SensorFrame> frames;
  std::vector<SimEvent> events;
  ObjectState final_state;
  bool halted_early = false;
};

/// Indentation solving loading_force(d) = m g cos(tilt); throws
/// DensificationError when the load exceeds the operational force range.
double quasi_static_indentation(const ObjectSpec& object,
                                const lattice::MechanicalModel& model,
                                double tilt_deg);

/// Exact area of a disc clipped to an axis-aligned rectangle.
double disc_rect_overlap(double cx, double cy, double r, double x0, double y0,
                         double x1, double y1);

/// Split the object's normal weight (N) over the 16 cells by footprint
/// overlap fractions; footprint area hanging off the tile carries no load.
std::array<double, sensing::kCellCount> footprint_loads(
    const ObjectSpec& object, const sensing::CoilArraySpec& array, double x_mm,
    double y_mm, double tilt_deg);

/// One semi-implicit Euler step of the 1-D motion along the tilt axis, with
/// stiction handling. Friction density is read from the cell under the
/// object center. Does not update indentation or detect edge exit.
ObjectState step(const ObjectState& state, double dt_s, double tilt_deg,
                 const sensing::StiffnessMap& map, const FrictionModel& friction,
                 const sensing::CoilArraySpec& array, Axis axis = Axis::X);

/// arctan(mu_s) at the cell under the given position, degrees.
double min_initiation_tilt_deg(const sensing::StiffnessMap& map,
                               const FrictionModel& friction, double x_mm,
                               double y_mm,
                               const sensing::CoilArraySpec& array = {});

/// Deterministic fixed-step run: same scenario, bit-identical logs.
SimulationResult simulate(const Scenario& scenario,
                          const lattice::CalibrationSet& calibration,
                          const FrictionModel& friction);

// --- single-pad cyclic compression (characterization-style runs) ---

struct CycleScenario {
  double relative_density = 0.10;
  double peak_displacement_mm = lattice::kDensificationDispMm;
  double rate_mm_s = 0.5; // quasi-static stage speed
  int cell = 5;           // loaded array cell
  double sample_hz = kDefaultFrameHz;
};

struct CycleLog {
  std::vector<double> t_s;
  std::vector<double> displacement_mm;
  std::vector<double> force_n;
  std::vector<sensing::SensorFrame> frames;
  size_t peak_index = 0;
};

/// One full loading/unloading cycle sampled at sample_hz: triangle
/// displacement profile, model forces, synthetic frames.
CycleLog simulate_cycle(const CycleScenario& cycle,
                        const lattice::CalibrationSet& calibration);

} // namespace copess::dynamics
