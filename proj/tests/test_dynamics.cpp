// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "copess/dynamics.hpp"

using namespace copess;
using namespace copess::dynamics;
using doctest::Approx;

namespace {

const double kDeg = std::numbers::pi / 180.0;

Scenario flat_impulse(double rho, double v0, double x0 = 10.0,
                      double duration = 20.0) {
  Scenario scn;
  scn.map = sensing::StiffnessMap::uniform(rho);
  scn.schedule = TiltSchedule({{0.0, 0.0}});
  scn.initial.x_mm = x0;
  scn.initial.y_mm = 56.25;
  scn.initial.vx_mm_s = v0;
  scn.duration_s = duration;
  return scn;
}

} // namespace

TEST_CASE("tilt schedule interpolation and validation") {
  const auto ramp = TiltSchedule::default_ramp();
  CHECK(ramp.angle_deg_at(0.0) == Approx(0.0));
  CHECK(ramp.angle_deg_at(50.0) == Approx(10.0));
  CHECK(ramp.angle_deg_at(100.0) == Approx(20.0));
  CHECK(ramp.angle_deg_at(200.0) == Approx(0.0));
  CHECK(ramp.angle_deg_at(300.0) == Approx(-20.0));
  CHECK(ramp.angle_deg_at(1e9) == Approx(-20.0)); // clamps past the end

  CHECK_THROWS_AS(TiltSchedule({{0.0, 0.0}, {0.0, 5.0}}), ValidationError);
  CHECK_THROWS_AS(TiltSchedule({{0.0, 95.0}}), ValidationError);
  CHECK_THROWS_AS(TiltSchedule({}), ValidationError);
}

TEST_CASE("friction calibration from initiation tilts") {
  const auto friction = FrictionModel::builtin();

  CHECK(friction.mu_s(0.20) == Approx(std::tan(5.0 * kDeg)).epsilon(1e-12));
  CHECK(friction.mu_s(0.20) == Approx(0.0875).epsilon(1e-3));
  CHECK(friction.mu_s(0.07) == Approx(std::tan(12.7 * kDeg)).epsilon(1e-12));
  CHECK(friction.mu_s(0.07) == Approx(0.2254).epsilon(1e-3));

  CHECK(friction.kinetic_ratio() > 0.0);
  CHECK(friction.kinetic_ratio() <= 1.0);
  CHECK(friction.mu_k(0.10) == Approx(friction.kinetic_ratio() * friction.mu_s(0.10)));

  // the two stopping anchors alone would demand mu_k(0.07)/mu_k(0.10) =
  // 110/75; the shared power law approximates it in least squares
  CHECK(110.0 / 75.0 == Approx(1.467).epsilon(1e-3));
  const double model_ratio = friction.mu_k(0.07) / friction.mu_k(0.10);
  CHECK(model_ratio == Approx(friction.mu_s(0.07) / friction.mu_s(0.10)));
  CHECK(model_ratio > 1.0);

  // least-squares fit keeps both anchors within 10 %
  CHECK(friction.stopping_distance_mm(0.07, friction.reference_impulse_mm_s()) ==
        Approx(75.0).epsilon(0.10));
  CHECK(friction.stopping_distance_mm(0.10, friction.reference_impulse_mm_s()) ==
        Approx(110.0).epsilon(0.10));
}

TEST_CASE("friction calibration rejects inconsistent anchors") {
  CHECK_THROWS_AS((void)FrictionModel::calibrate({{0.07, 5.0}, {0.20, 12.7}},
                                                 {}, 500.0),
                  CalibrationError);
  CHECK_THROWS_AS((void)FrictionModel::calibrate({{0.07, 12.7}}, {}, 500.0),
                  CalibrationError);
}

TEST_CASE("quasi-static indentation") {
  const auto calib = lattice::CalibrationSet::builtin();
  ObjectSpec obj;

  SUBCASE("massless object does not indent") {
    ObjectSpec weightless = obj;
    weightless.mass_kg = 0.0;
    CHECK(quasi_static_indentation(weightless, calib.model_for(0.20), 0.0) == 0.0);
  }

  SUBCASE("500 g on 20 % indents within the linear region") {
    const double d = quasi_static_indentation(obj, calib.model_for(0.20), 0.0);
    const double weight = 0.5 * kGravityMS2; // 4.903 N
    CHECK(d == Approx(weight / 2.52).epsilon(1e-6));
    CHECK(d < 2.0);
    CHECK(calib.model_for(0.20).loading_force(d) == Approx(weight).epsilon(1e-6));
  }

  SUBCASE("500 g on 10 % exceeds the force range") {
    CHECK_THROWS_AS((void)quasi_static_indentation(obj, calib.model_for(0.10), 0.0),
                    DensificationError);
  }
}

TEST_CASE("disc-rectangle overlap") {
  const double pi = std::numbers::pi;
  // disc strictly inside
  CHECK(disc_rect_overlap(5, 5, 1, 0, 0, 10, 10) == Approx(pi).epsilon(1e-12));
  // rectangle strictly inside
  CHECK(disc_rect_overlap(5, 5, 10, 4, 4, 6, 6) == Approx(4.0).epsilon(1e-12));
  // exact quarter at a corner
  CHECK(disc_rect_overlap(0, 0, 2, 0, 0, 10, 10) == Approx(pi).epsilon(1e-12));
  // half
  CHECK(disc_rect_overlap(0, 5, 2, 0, 0, 10, 10) == Approx(2 * pi).epsilon(1e-12));
  // disjoint
  CHECK(disc_rect_overlap(-5, -5, 1, 0, 0, 10, 10) == 0.0);
  // partition property: overlaps with grid cells sum to the full disc
  double total = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      total += disc_rect_overlap(60.0, 77.0, 37.5, i * 37.5, j * 37.5,
                                 (i + 1) * 37.5, (j + 1) * 37.5);
  CHECK(total == Approx(pi * 37.5 * 37.5).epsilon(1e-12));
}

TEST_CASE("footprint load splitting") {
  const sensing::CoilArraySpec array;
  ObjectSpec obj;

  SUBCASE("point footprint loads the center cell only") {
    obj.footprint = FootprintKind::Point;
    const auto loads = footprint_loads(obj, array, 60.0, 20.0, 0.0);
    for (int c = 0; c < sensing::kCellCount; ++c) {
      if (c == array.cell_at(60.0, 20.0))
        CHECK(loads[static_cast<size_t>(c)] == Approx(0.5 * kGravityMS2));
      else
        CHECK(loads[static_cast<size_t>(c)] == 0.0);
    }
  }

  SUBCASE("disc fully on the tile carries the whole weight") {
    const auto loads = footprint_loads(obj, array, 75.0, 75.0, 0.0);
    double total = 0.0;
    for (double v : loads) total += v;
    CHECK(total == Approx(0.5 * kGravityMS2).epsilon(1e-9));
  }

  SUBCASE("overhanging footprint sheds the off-tile share") {
    const auto loads = footprint_loads(obj, array, 5.0, 75.0, 0.0);
    double total = 0.0;
    for (double v : loads) total += v;
    CHECK(total < 0.5 * kGravityMS2);
    CHECK(total > 0.0);
  }

  SUBCASE("tilt reduces the normal weight by cos") {
    const auto flat = footprint_loads(obj, array, 75.0, 75.0, 0.0);
    const auto tilted = footprint_loads(obj, array, 75.0, 75.0, 20.0);
    double s_flat = 0.0, s_tilt = 0.0;
    for (int c = 0; c < sensing::kCellCount; ++c) {
      s_flat += flat[static_cast<size_t>(c)];
      s_tilt += tilted[static_cast<size_t>(c)];
    }
    CHECK(s_tilt == Approx(s_flat * std::cos(20.0 * kDeg)).epsilon(1e-12));
  }
}

TEST_CASE("stiction holds the object at rest") {
  const auto friction = FrictionModel::builtin();
  const auto map = sensing::StiffnessMap::uniform(0.20);
  const sensing::CoilArraySpec array;

  ObjectState state;
  state.x_mm = 56.25;
  state.y_mm = 56.25;

  SUBCASE("flat tile, zero velocity: unchanged forever") {
    ObjectState s = state;
    for (int i = 0; i < 1000; ++i) s = step(s, 1e-3, 0.0, map, friction, array);
    CHECK(s.x_mm == state.x_mm);
    CHECK(s.vx_mm_s == 0.0);
  }

  SUBCASE("just below the initiation tilt: no motion") {
    ObjectState s = state;
    for (int i = 0; i < 5000; ++i) s = step(s, 1e-3, 4.99, map, friction, array);
    CHECK(s.x_mm == state.x_mm);
  }

  SUBCASE("just above the initiation tilt: motion starts") {
    ObjectState s = state;
    for (int i = 0; i < 5000; ++i) s = step(s, 1e-3, 5.01, map, friction, array);
    CHECK(s.x_mm > state.x_mm);
    CHECK(s.vx_mm_s > 0.0);
  }
}

TEST_CASE("min initiation tilt") {
  const auto friction = FrictionModel::builtin();
  CHECK(min_initiation_tilt_deg(sensing::StiffnessMap::uniform(0.20), friction,
                                10.0, 10.0) == Approx(5.0).epsilon(1e-9));
  CHECK(min_initiation_tilt_deg(sensing::StiffnessMap::uniform(0.07), friction,
                                10.0, 10.0) == Approx(12.7).epsilon(1e-9));
  // arctangent identity: mu_s = 1 -> 45 deg
  const auto unit = FrictionModel::calibrate({{0.07, 45.0}, {0.20, 30.0}}, {}, 500.0);
  CHECK(min_initiation_tilt_deg(sensing::StiffnessMap::uniform(0.07), unit, 10.0,
                                10.0) == Approx(45.0).epsilon(1e-9));
}

TEST_CASE("flat-tile stopping distances follow the calibration") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  const double v0 = friction.reference_impulse_mm_s();

  SUBCASE("7 % stops within 10 % of the 75 mm anchor") {
    const auto run = simulate(flat_impulse(0.07, v0), calib, friction);
    CHECK_FALSE(run.halted_early);
    CHECK(run.final_state.vx_mm_s == 0.0);
    const double travel = run.final_state.x_mm - 10.0;
    CHECK(travel == Approx(75.0).epsilon(0.10));
  }

  SUBCASE("10 % stops within 10 % of the 110 mm anchor") {
    const auto run = simulate(flat_impulse(0.10, v0), calib, friction);
    const double travel = run.final_state.x_mm - 10.0;
    CHECK(travel == Approx(110.0).epsilon(0.10));
  }

  SUBCASE("20 % keeps moving off the tile edge") {
    const auto run = simulate(flat_impulse(0.20, v0), calib, friction);
    CHECK(run.halted_early);
    REQUIRE_FALSE(run.events.empty());
    CHECK(run.events.back().kind == SimEvent::Kind::OffEdge);
    CHECK(std::abs(run.final_state.vx_mm_s) > 0.0);
    CHECK(friction.stopping_distance_mm(0.20, v0) > 150.0);
  }

  SUBCASE("stopping distance is monotone in density at equal impulse") {
    double prev = 0.0;
    for (double rho : {0.07, 0.10, 0.20}) {
      const double s = friction.stopping_distance_mm(rho, v0);
      CHECK(s > prev);
      prev = s;
    }
  }
}

TEST_CASE("half-tile boundary sharpens the deceleration") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  Scenario scn = flat_impulse(0.20, 500.0);
  scn.map = sensing::StiffnessMap::half_tile(0.20, 0.07);
  const auto run = simulate(scn, calib, friction);

  // locate the first frame past the column boundary at x = 75 mm
  size_t k = 0;
  while (k < run.trajectory.size() && run.trajectory[k].x_mm <= 75.0) ++k;
  REQUIRE(k > 2);
  REQUIRE(k + 2 < run.trajectory.size());
  auto decel = [&](size_t i) {
    return (run.trajectory[i].vx_mm_s - run.trajectory[i + 1].vx_mm_s) /
           (run.trajectory[i + 1].t_s - run.trajectory[i].t_s);
  };
  const double before = decel(k - 3);
  const double after = decel(k + 1);
  CHECK(after > before);
  CHECK(after / before ==
        Approx(friction.mu_k(0.07) / friction.mu_k(0.20)).epsilon(0.05));
}

TEST_CASE("simulation determinism and dissipation") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  const auto scn = flat_impulse(0.10, 400.0, 10.0, 5.0);

  const auto a = simulate(scn, calib, friction);
  const auto b = simulate(scn, calib, friction);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].x_mm == b.trajectory[i].x_mm);
    CHECK(a.trajectory[i].vx_mm_s == b.trajectory[i].vx_mm_s);
    CHECK(a.frames[i].delta_l_uh == b.frames[i].delta_l_uh);
  }

  // flat tile: kinetic energy never increases
  double prev = 1e300;
  for (const auto& row : a.trajectory) {
    const double ke = row.vx_mm_s * row.vx_mm_s + row.vy_mm_s * row.vy_mm_s;
    CHECK(ke <= prev + 1e-9);
    prev = ke;
  }
}

TEST_CASE("zero-duration scenario logs only the initial state") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  Scenario scn = flat_impulse(0.10, 0.0, 56.25, 0.0);
  scn.schedule = TiltSchedule({{0.0, 0.0}});
  scn.duration_s = 0.0; // falls back to the schedule end, also 0
  const auto run = simulate(scn, calib, friction);
  CHECK(run.trajectory.size() == 1);
  CHECK(run.frames.size() == 1);
  CHECK(run.final_state.x_mm == 56.25);
}

TEST_CASE("frame consistency: weight recovered at rest") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  Scenario scn = flat_impulse(0.20, 0.0, 75.0, 0.1);
  scn.initial.y_mm = 75.0;
  const auto run = simulate(scn, calib, friction);
  REQUIRE_FALSE(run.frames.empty());

  const sensing::GapResponse gap(calib);
  double recovered = 0.0;
  for (int c = 0; c < sensing::kCellCount; ++c) {
    const double dl = run.frames.back().delta_l_uh[static_cast<size_t>(c)];
    if (dl == 0.0) continue;
    const double d = dl / gap.slope_uh_per_mm(0.20);
    recovered += calib.model_for(0.20).loading_force(d);
  }
  CHECK(recovered == Approx(0.5 * kGravityMS2).epsilon(1e-6));
}

TEST_CASE("densification halts a run with the offending cell") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  Scenario scn = flat_impulse(0.10, 0.0, 56.25, 1.0);
  scn.object.footprint = FootprintKind::Point; // 4.905 N on one 10 % cell
  const auto run = simulate(scn, calib, friction);
  CHECK(run.halted_early);
  REQUIRE_FALSE(run.events.empty());
  CHECK(run.events.front().kind == SimEvent::Kind::Densification);
  CHECK(run.events.front().cell == 5);
}

TEST_CASE("cycle simulation") {
  const auto calib = lattice::CalibrationSet::builtin();
  CycleScenario cyc;
  cyc.relative_density = 0.20;
  const auto log = simulate_cycle(cyc, calib);

  CHECK(log.t_s.size() == 481); // 24 s at 20 Hz, inclusive
  CHECK(log.displacement_mm[log.peak_index] == Approx(6.0));
  CHECK(log.force_n[log.peak_index] == Approx(16.68).epsilon(1e-9));
  CHECK(log.displacement_mm.front() == 0.0);
  CHECK(log.displacement_mm.back() == Approx(0.0));
  CHECK(log.force_n.front() == 0.0);
  // only the loaded cell responds
  for (size_t k = 0; k < log.frames.size(); ++k)
    for (int c = 0; c < sensing::kCellCount; ++c)
      if (c != cyc.cell) CHECK(log.frames[k].delta_l_uh[static_cast<size_t>(c)] == 0.0);

  CHECK_THROWS_AS((void)simulate_cycle({.peak_displacement_mm = 0.0}, calib),
                  ValidationError);
  CHECK_THROWS_AS((void)simulate_cycle({.peak_displacement_mm = 7.0}, calib),
                  ValidationError);
}

TEST_CASE("frame rate must divide the integration rate") {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = FrictionModel::builtin();
  Scenario scn = flat_impulse(0.10, 0.0, 56.25, 1.0);
  scn.frame_hz = 30.0; // 1 ms steps cannot land on 30 Hz ticks
  CHECK_THROWS_AS((void)simulate(scn, calib, friction), ValidationError);
}
