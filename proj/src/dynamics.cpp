// SPDX-License-Identifier: Apache-2.0
#include "copess/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace copess::dynamics {

namespace {

constexpr double kDeg2Rad = std::numbers::pi / 180.0;

double f_circle(double x, double r) {
  return std::sqrt(std::max(0.0, r * r - x * x));
}

// Antiderivative of sqrt(r^2 - x^2).
double h_circle(double x, double r) {
  const double c = std::clamp(x / r, -1.0, 1.0);
  return 0.5 * (x * f_circle(x, r) + r * r * std::asin(c));
}

} // namespace

TiltSchedule::TiltSchedule(std::vector<Knot> knots, Axis axis)
    : knots_(std::move(knots)), axis_(axis) {
  if (knots_.empty()) throw ValidationError("tilt schedule needs >= 1 knot");
  for (size_t i = 0; i < knots_.size(); ++i) {
    if (std::abs(knots_[i].angle_deg) > 90.0)
      throw ValidationError("tilt angle magnitude must not exceed 90 deg");
    if (i > 0 && !(knots_[i].t_s > knots_[i - 1].t_s))
      throw ValidationError("tilt schedule times must be strictly increasing");
  }
}

TiltSchedule TiltSchedule::default_ramp(Axis axis) {
  // +-20 deg at 0.2 deg/s: level, ramp up, ramp all the way down.
  return TiltSchedule({{0.0, 0.0}, {100.0, 20.0}, {300.0, -20.0}}, axis);
}

TiltSchedule TiltSchedule::ramp_to(double amplitude_deg, double rate_deg_s,
                                   Axis axis) {
  if (!(rate_deg_s > 0.0)) throw ValidationError("ramp rate must be positive");
  const double t_end = std::abs(amplitude_deg) / rate_deg_s;
  if (t_end == 0.0) return TiltSchedule({{0.0, 0.0}}, axis);
  return TiltSchedule({{0.0, 0.0}, {t_end, amplitude_deg}}, axis);
}

double TiltSchedule::angle_deg_at(double t_s) const {
  if (t_s <= knots_.front().t_s) return knots_.front().angle_deg;
  if (t_s >= knots_.back().t_s) return knots_.back().angle_deg;
  for (size_t i = 1; i < knots_.size(); ++i) {
    if (t_s <= knots_[i].t_s) {
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      const double u = (t_s - a.t_s) / (b.t_s - a.t_s);
      return a.angle_deg + u * (b.angle_deg - a.angle_deg);
    }
  }
  return knots_.back().angle_deg;
}

FrictionModel FrictionModel::calibrate(
    const std::vector<FrictionTiltAnchor>& tilts,
    const std::vector<StoppingAnchor>& stopping, double v0_mm_s) {
  if (tilts.size() < 2)
    throw CalibrationError("need at least 2 motion-initiation tilt anchors");
  if (!(v0_mm_s > 0.0))
    throw CalibrationError("reference impulse must be positive");
  std::vector<lattice::Anchor> mu_anchors;
  for (const auto& a : tilts) {
    if (!(a.initiation_tilt_deg > 0.0 && a.initiation_tilt_deg < 90.0))
      throw CalibrationError("initiation tilt must lie in (0, 90) deg");
    mu_anchors.push_back(
        {a.relative_density, std::tan(a.initiation_tilt_deg * kDeg2Rad)});
  }
  FrictionModel model;
  model.mu_s_law_ = lattice::DensityScalingLaw::fit(std::move(mu_anchors));
  if (!(model.mu_s_law_.exponent() < 0.0))
    throw CalibrationError(
        "inconsistent anchors: mu_s must decrease with relative density");
  model.v0_ref_ = v0_mm_s;
  if (stopping.empty()) {
    model.ratio_ = 1.0;
    return model;
  }
  // s_pred(rho) = (1/r) * v0^2 / (2 g mu_s(rho)); least squares over 1/r.
  double num = 0.0, den = 0.0;
  for (const auto& s : stopping) {
    if (!(s.distance_mm > 0.0))
      throw CalibrationError("stopping distances must be positive");
    const double w =
        v0_mm_s * v0_mm_s / (2.0 * kGravityMmS2 * model.mu_s(s.relative_density));
    num += w * s.distance_mm;
    den += w * w;
  }
  const double inv_r = num / den;
  if (!(inv_r >= 1.0))
    throw CalibrationError(
        "reference impulse inconsistent with stopping anchors (mu_k > mu_s)");
  model.ratio_ = 1.0 / inv_r;
  return model;
}

FrictionModel FrictionModel::builtin() {
  return calibrate({{0.07, 12.7}, {0.20, 5.0}}, {{0.07, 75.0}, {0.10, 110.0}},
                   500.0);
}

double FrictionModel::mu_s(double rho) const { return mu_s_law_.at(rho); }

double FrictionModel::mu_k(double rho) const { return ratio_ * mu_s(rho); }

double FrictionModel::stopping_distance_mm(double rho, double v0_mm_s) const {
  return v0_mm_s * v0_mm_s / (2.0 * kGravityMmS2 * mu_k(rho));
}

double quasi_static_indentation(const ObjectSpec& object,
                                const lattice::MechanicalModel& model,
                                double tilt_deg) {
  const double load = object.mass_kg * kGravityMS2 * std::cos(tilt_deg * kDeg2Rad);
  if (load > model.operational_force_range() + 1e-12)
    throw DensificationError("normal load exceeds the operational force range");
  return model.displacement_for_force(load);
}

double disc_rect_overlap(double cx, double cy, double r, double x0, double y0,
                         double x1, double y1) {
  const double a = std::max(x0 - cx, -r);
  const double b = std::min(x1 - cx, r);
  if (b <= a) return 0.0;
  const double yl = y0 - cy;
  const double yh = y1 - cy;
  if (yl >= r || yh <= -r || yh <= yl) return 0.0;

  double pts[6];
  int n = 0;
  pts[n++] = a;
  pts[n++] = b;
  for (double y : {yl, yh}) {
    if (std::abs(y) < r) {
      const double xc = f_circle(y, r);
      if (xc > a && xc < b) pts[n++] = xc;
      if (-xc > a && -xc < b) pts[n++] = -xc;
    }
  }
  std::sort(pts, pts + n);

  double area = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double s = pts[i];
    const double t = pts[i + 1];
    if (t <= s) continue;
    const double m = 0.5 * (s + t);
    const double fm = f_circle(m, r);
    const double top = std::min(yh, fm);
    const double bot = std::max(yl, -fm);
    if (top <= bot) continue;
    const double hseg = h_circle(t, r) - h_circle(s, r);
    const double top_int = (fm <= yh) ? hseg : yh * (t - s);
    const double bot_int = (-fm >= yl) ? -hseg : yl * (t - s);
    area += top_int - bot_int;
  }
  return std::max(0.0, area);
}

std::array<double, sensing::kCellCount> footprint_loads(
    const ObjectSpec& object, const sensing::CoilArraySpec& array, double x_mm,
    double y_mm, double tilt_deg) {
  std::array<double, sensing::kCellCount> loads{};
  const double weight =
      object.mass_kg * kGravityMS2 * std::cos(tilt_deg * kDeg2Rad);
  if (object.footprint == FootprintKind::Point) {
    if (x_mm < 0.0 || x_mm > array.span_x_mm() || y_mm < 0.0 ||
        y_mm > array.span_y_mm())
      return loads;
    loads[static_cast<size_t>(array.cell_at(x_mm, y_mm))] = weight;
    return loads;
  }
  const double r = object.footprint_radius_mm;
  if (!(r > 0.0)) throw ValidationError("disc footprint radius must be positive");
  const double full = std::numbers::pi * r * r;
  for (int cell = 0; cell < array.rows * array.cols; ++cell) {
    const int row = cell / array.cols;
    const int col = cell % array.cols;
    const double overlap =
        disc_rect_overlap(x_mm, y_mm, r, col * array.pitch_mm,
                          row * array.pitch_mm, (col + 1) * array.pitch_mm,
                          (row + 1) * array.pitch_mm);
    loads[static_cast<size_t>(cell)] = weight * overlap / full;
  }
  return loads;
}

ObjectState step(const ObjectState& state, double dt_s, double tilt_deg,
                 const sensing::StiffnessMap& map, const FrictionModel& friction,
                 const sensing::CoilArraySpec& array, Axis axis) {
  ObjectState next = state;
  const double rho =
      map.at_cell(array.cell_at(state.x_mm, state.y_mm));
  const double theta = tilt_deg * kDeg2Rad;
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double mu_s = friction.mu_s(rho);
  const double mu_k = friction.mu_k(rho);

  double v = (axis == Axis::X) ? state.vx_mm_s : state.vy_mm_s;
  const bool held = std::abs(v) < kStictionVelocityEps &&
                    std::abs(sin_t) <= mu_s * cos_t;
  if (held) {
    v = 0.0;
  } else {
    const double drive = kGravityMmS2 * sin_t;
    const double sgn = (v != 0.0) ? (v > 0.0 ? 1.0 : -1.0)
                                  : (sin_t > 0.0 ? 1.0 : -1.0);
    const double a = drive - sgn * mu_k * kGravityMmS2 * cos_t;
    const double v_new = v + a * dt_s;
    // A friction-induced sign flip below the stiction threshold is a stop,
    // not a reversal.
    if (v != 0.0 && v * v_new < 0.0 && std::abs(sin_t) <= mu_s * cos_t)
      v = 0.0;
    else
      v = v_new;
  }
  double& pos = (axis == Axis::X) ? next.x_mm : next.y_mm;
  double& vel = (axis == Axis::X) ? next.vx_mm_s : next.vy_mm_s;
  vel = v;
  pos += v * dt_s;
  next.moving = v != 0.0;
  return next;
}

double min_initiation_tilt_deg(const sensing::StiffnessMap& map,
                               const FrictionModel& friction, double x_mm,
                               double y_mm, const sensing::CoilArraySpec& array) {
  const double rho = map.at_cell(array.cell_at(x_mm, y_mm));
  return std::atan(friction.mu_s(rho)) / kDeg2Rad;
}

SimulationResult simulate(const Scenario& scenario,
                          const lattice::CalibrationSet& calibration,
                          const FrictionModel& friction) {
  if (!(scenario.dt_s > 0.0)) throw ValidationError("timestep must be positive");
  if (!(scenario.frame_hz > 0.0)) throw ValidationError("frame rate must be positive");
  const double steps_per_frame_f = 1.0 / (scenario.frame_hz * scenario.dt_s);
  const auto steps_per_frame = static_cast<long long>(std::llround(steps_per_frame_f));
  if (steps_per_frame < 1 ||
      std::abs(steps_per_frame_f - static_cast<double>(steps_per_frame)) > 1e-9)
    throw ValidationError("frame rate must divide the integration rate");

  const sensing::CoilArraySpec array;
  const Axis axis = scenario.schedule.axis();
  const double duration =
      scenario.duration_s > 0.0 ? scenario.duration_s : scenario.schedule.end_time_s();
  const auto n_steps = static_cast<long long>(std::llround(duration / scenario.dt_s));

  SimulationResult result;
  ObjectState state = scenario.initial;
  state.moving = std::abs(state.vx_mm_s) + std::abs(state.vy_mm_s) > 0.0;

  auto record = [&](double t) -> bool {
    const double tilt = scenario.schedule.angle_deg_at(t);
    const auto loads = footprint_loads(scenario.object, array, state.x_mm,
                                       state.y_mm, tilt);
    const int center_cell = array.cell_at(state.x_mm, state.y_mm);
    for (int cell = 0; cell < sensing::kCellCount; ++cell) {
      const auto model = calibration.model_for(scenario.map.at_cell(cell));
      if (loads[static_cast<size_t>(cell)] >
          model.operational_force_range() + 1e-12) {
        result.events.push_back({SimEvent::Kind::Densification, t, cell,
                                 "cell load exceeds operational force range"});
        return false;
      }
    }
    const auto frame =
        sensing::simulate_frame(array, scenario.map, loads, t, calibration);
    const auto center_model =
        calibration.model_for(scenario.map.at_cell(center_cell));
    state.indentation_mm = center_model.displacement_for_force(
        loads[static_cast<size_t>(center_cell)]);
    result.frames.push_back(frame);
    result.trajectory.push_back({t, state.x_mm, state.y_mm, state.vx_mm_s,
                                 state.vy_mm_s, state.indentation_mm,
                                 scenario.map.at_cell(center_cell)});
    return true;
  };

  if (!record(0.0)) {
    result.halted_early = true;
    result.final_state = state;
    return result;
  }

  for (long long k = 1; k <= n_steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * scenario.dt_s;
    const double t = static_cast<double>(k) * scenario.dt_s;
    const double tilt = scenario.schedule.angle_deg_at(t_prev);
    state = step(state, scenario.dt_s, tilt, scenario.map, friction, array, axis);
    if (state.x_mm < 0.0 || state.x_mm > array.span_x_mm() ||
        state.y_mm < 0.0 || state.y_mm > array.span_y_mm()) {
      result.events.push_back(
          {SimEvent::Kind::OffEdge, t, -1, "object center left the tile"});
      result.halted_early = true;
      break;
    }
    if (k % steps_per_frame == 0) {
      if (!record(t)) {
        result.halted_early = true;
        break;
      }
    }
  }
  result.final_state = state;
  return result;
}

CycleLog simulate_cycle(const CycleScenario& cycle,
                        const lattice::CalibrationSet& calibration) {
  if (!(cycle.rate_mm_s > 0.0)) throw ValidationError("cycle rate must be positive");
  if (!(cycle.peak_displacement_mm > 0.0 &&
        cycle.peak_displacement_mm <= lattice::kDensificationDispMm))
    throw ValidationError("peak displacement must lie in (0, 6] mm");
  if (cycle.cell < 0 || cycle.cell >= sensing::kCellCount)
    throw ValidationError("cycle cell index out of range");

  const auto model = calibration.model_for(cycle.relative_density);
  const sensing::GapResponse response(calibration);
  const double slope = response.slope_uh_per_mm(cycle.relative_density);

  const double t_peak = cycle.peak_displacement_mm / cycle.rate_mm_s;
  const double t_total = 2.0 * t_peak;
  const auto n = static_cast<long long>(std::llround(t_total * cycle.sample_hz));

  CycleLog log;
  double d_peak_seen = 0.0;
  for (long long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / cycle.sample_hz;
    double d = (t <= t_peak) ? cycle.rate_mm_s * t
                             : cycle.rate_mm_s * (t_total - t);
    d = std::clamp(d, 0.0, cycle.peak_displacement_mm);
    if (d > d_peak_seen) {
      d_peak_seen = d;
      log.peak_index = static_cast<size_t>(k);
    }
    const bool loading = t <= t_peak;
    const double force = loading ? model.loading_force(d)
                                 : model.unloading_force(d, d_peak_seen);
    sensing::SensorFrame frame;
    frame.timestamp_s = t;
    frame.delta_l_uh[static_cast<size_t>(cycle.cell)] = slope * d;
    log.t_s.push_back(t);
    log.displacement_mm.push_back(d);
    log.force_n.push_back(force);
    log.frames.push_back(frame);
  }
  return log;
}

} // namespace copess::dynamics
