// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks over the shipped calibration: each check prints one
// PASS/FAIL line and the process exits with the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "copess/dynamics.hpp"
#include "copess/optimizer.hpp"
#include "copess/pipeline.hpp"
#include "copess/sensing.hpp"

using namespace copess;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail = "") {
  std::printf("%-38s %s%s%s\n", name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  if (!pass) ++g_failures;
}

bool within(double value, double expect, double rel) {
  return std::abs(value - expect) <= rel * std::abs(expect);
}

pipeline::CharacterizationMetrics cycle_metrics(
    double rho, const lattice::CalibrationSet& calib) {
  dynamics::CycleScenario cyc;
  cyc.relative_density = rho;
  const auto log = dynamics::simulate_cycle(cyc, calib);
  pipeline::TimedStream disp, force, induct;
  for (size_t k = 0; k < log.t_s.size(); ++k) {
    disp.samples.push_back({log.t_s[k], {log.displacement_mm[k]}});
    force.samples.push_back({log.t_s[k], {log.force_n[k]}});
    std::vector<double> row(log.frames[k].delta_l_uh.begin(),
                            log.frames[k].delta_l_uh.end());
    induct.samples.push_back({log.t_s[k], std::move(row)});
  }
  return pipeline::characterize(disp, force, induct);
}

dynamics::Scenario flat_impulse(double rho, double v0, double x0,
                                double duration) {
  dynamics::Scenario scn;
  scn.map = sensing::StiffnessMap::uniform(rho);
  scn.schedule = dynamics::TiltSchedule({{0.0, 0.0}});
  scn.initial.x_mm = x0;
  scn.initial.y_mm = 56.25;
  scn.initial.vx_mm_s = v0;
  scn.duration_s = duration;
  return scn;
}

// Does the object leave its start position under a constant tilt?
bool moves_at_tilt(double rho, double tilt_deg,
                   const lattice::CalibrationSet& calib,
                   const dynamics::FrictionModel& friction) {
  dynamics::Scenario scn;
  scn.map = sensing::StiffnessMap::uniform(rho);
  scn.schedule = dynamics::TiltSchedule({{0.0, tilt_deg}});
  scn.initial.x_mm = 56.25;
  scn.initial.y_mm = 56.25;
  scn.duration_s = 2.0;
  const auto run = dynamics::simulate(scn, calib, friction);
  return std::abs(run.final_state.x_mm - 56.25) > 1e-9;
}

double initiation_tilt_by_bisection(double rho,
                                    const lattice::CalibrationSet& calib,
                                    const dynamics::FrictionModel& friction) {
  double lo = 0.0, hi = 45.0;
  while (hi - lo > 0.005) {
    const double mid = 0.5 * (lo + hi);
    if (moves_at_tilt(rho, mid, calib, friction))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

void check_table_round_trip(const lattice::CalibrationSet& calib) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& a : calib.anchors()) {
    const auto m = cycle_metrics(a.relative_density, calib);
    const bool match =
        within(m.effective_stiffness_n_per_mm, a.k0_n_per_mm, 0.01) &&
        within(m.operational_force_range_n, a.f_op_n, 0.01) &&
        within(m.sensitivity_uh_per_n, a.sensitivity_uh_per_n, 0.01) &&
        within(m.hysteresis_pct, a.hysteresis_pct, 0.01);
    if (!match) {
      ok = false;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "mismatch at rho=%.2f", a.relative_density);
      detail += buf;
    }
  }
  const double elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (elapsed_s >= 1.0) {
    ok = false;
    detail += " too slow: " + std::to_string(elapsed_s) + " s";
  }
  report("01 cycle metrics round-trip", ok, detail);
}

void check_scaling_ratios(const lattice::CalibrationSet& calib) {
  const double k0_ratio = calib.k0(0.20) / calib.k0(0.07);
  const double f_ratio = calib.f_op(0.20) / calib.f_op(0.07);
  const double s_ratio = calib.sensitivity(0.07) / calib.sensitivity(0.20);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "k0 %.2f  f_op %.2f  sens %.2f", k0_ratio,
                f_ratio, s_ratio);
  report("02 stiffness/sensitivity ratios",
         k0_ratio >= 6.6 && k0_ratio <= 7.0 && f_ratio >= 9.2 &&
             f_ratio <= 9.6 && s_ratio >= 22.5 && s_ratio <= 23.5,
         buf);
}

void check_hysteresis_ordering(const lattice::CalibrationSet& calib) {
  report("03 hysteresis falls with density",
         calib.hysteresis_pct(0.07) > calib.hysteresis_pct(0.10) &&
             calib.hysteresis_pct(0.10) > calib.hysteresis_pct(0.20));
}

void check_initiation_tilts(const lattice::CalibrationSet& calib,
                            const dynamics::FrictionModel& friction) {
  const double t20 = initiation_tilt_by_bisection(0.20, calib, friction);
  const double t07 = initiation_tilt_by_bisection(0.07, calib, friction);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "20%%: %.3f deg  7%%: %.3f deg", t20, t07);
  report("04 initiation tilt thresholds",
         std::abs(t20 - 5.0) <= 0.1 && std::abs(t07 - 12.7) <= 0.1, buf);
}

void check_stopping_distances(const lattice::CalibrationSet& calib,
                              const dynamics::FrictionModel& friction) {
  const double v0 = friction.reference_impulse_mm_s();

  const auto soft = dynamics::simulate(flat_impulse(0.07, v0, 10.0, 20.0),
                                       calib, friction);
  const double s07 = soft.final_state.x_mm - 10.0;
  const auto mid = dynamics::simulate(flat_impulse(0.10, v0, 10.0, 20.0),
                                      calib, friction);
  const double s10 = mid.final_state.x_mm - 10.0;

  const auto stiff = dynamics::simulate(flat_impulse(0.20, v0, 5.0, 20.0),
                                        calib, friction);
  const bool exits_moving =
      stiff.halted_early && !stiff.events.empty() &&
      stiff.events.back().kind == dynamics::SimEvent::Kind::OffEdge &&
      std::abs(stiff.final_state.vx_mm_s) > 0.0;

  char buf[96];
  std::snprintf(buf, sizeof(buf), "7%%: %.1f mm  10%%: %.1f mm  20%%: %s", s07,
                s10, exits_moving ? "exits moving" : "stops on tile");
  report("05 flat-tile stopping distances",
         within(s07, 75.0, 0.10) && within(s10, 110.0, 0.10) && exits_moving &&
             friction.stopping_distance_mm(0.20, v0) > 150.0,
         buf);
}

void check_boundary_deceleration(const lattice::CalibrationSet& calib,
                                 const dynamics::FrictionModel& friction) {
  auto scn = flat_impulse(0.20, 500.0, 10.0, 20.0);
  scn.map = sensing::StiffnessMap::half_tile(0.20, 0.07);
  const auto run = dynamics::simulate(scn, calib, friction);

  size_t k = 0;
  while (k < run.trajectory.size() && run.trajectory[k].x_mm <= 75.0) ++k;
  bool ok = k > 0 && k + 2 < run.trajectory.size();
  double measured = 0.0;
  if (ok) {
    auto decel = [&](size_t i) {
      return (run.trajectory[i].vx_mm_s - run.trajectory[i + 1].vx_mm_s) /
             (run.trajectory[i + 1].t_s - run.trajectory[i].t_s);
    };
    const double before = decel(0);       // fully on the stiff band
    const double after = decel(k + 1);    // fully on the soft band
    const double expect = friction.mu_k(0.07) / friction.mu_k(0.20);
    measured = after / before;
    ok = before > 0.0 && within(measured, expect, 0.05);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "decel ratio %.3f", measured);
  report("06 boundary deceleration jump", ok, buf);
}

void check_crosstalk(const lattice::CalibrationSet& calib) {
  const sensing::CoilArraySpec array;
  bool ok = true;
  for (int active = 0; active < sensing::kCellCount && ok; ++active) {
    std::array<double, sensing::kCellCount> loads{};
    loads[static_cast<size_t>(active)] = 1.5;
    const auto frame = sensing::simulate_frame(
        array, sensing::StiffnessMap::uniform(0.10), loads, 0.0, calib);
    for (int c = 0; c < sensing::kCellCount; ++c) {
      if (c == active) continue;
      if (frame.delta_l_uh[static_cast<size_t>(c)] != 0.0) ok = false;
      if (sensing::crosstalk_response_uh(active, c) != 0.0) ok = false;
    }
  }
  report("07 zero inter-cell crosstalk", ok);
}

void check_repeatability(const lattice::CalibrationSet& calib) {
  dynamics::CycleScenario cyc;
  cyc.relative_density = 0.10;
  const auto log = dynamics::simulate_cycle(cyc, calib);
  const std::vector<std::vector<double>> clean(200, log.force_n);
  const double clean_pct = pipeline::repeatability_correlation_pct(clean);

  const double full_scale =
      *std::max_element(log.force_n.begin(), log.force_n.end());
  std::mt19937_64 rng(20260823);
  std::normal_distribution<double> noise(0.0, 0.01 * full_scale);
  auto noisy = clean;
  for (auto& curve : noisy)
    for (auto& v : curve) v += noise(rng);
  const double noisy_pct = pipeline::repeatability_correlation_pct(noisy);

  char buf[64];
  std::snprintf(buf, sizeof(buf), "clean %.4f%%  noisy %.4f%%", clean_pct,
                noisy_pct);
  report("08 cycle repeatability",
         std::abs(clean_pct - 100.0) < 1e-9 && noisy_pct >= 99.9, buf);
}

void check_localization(const lattice::CalibrationSet& calib,
                        const dynamics::FrictionModel& friction) {
  const sensing::CoilArraySpec array;
  bool ok = true;
  std::string detail;

  // single-cell frames land on the coil center exactly
  for (int cell = 0; cell < sensing::kCellCount; ++cell) {
    sensing::SensorFrame frame;
    frame.delta_l_uh[static_cast<size_t>(cell)] = 8.0;
    const auto est = pipeline::localize(frame, array);
    const auto [cx, cy] = array.center(cell);
    if (!est.detected || est.x_mm != cx || est.y_mm != cy) ok = false;
  }
  if (!ok) detail += "single-cell miss ";

  // full traverse: position error below half the coil pitch throughout
  auto scn = flat_impulse(0.10, 400.0, 40.0, 10.0);
  scn.frame_hz = 100.0;
  const auto run = dynamics::simulate(scn, calib, friction);
  std::vector<pipeline::LocalizationEstimate> track;
  for (const auto& frame : run.frames)
    track.push_back(pipeline::localize(frame, array));

  double max_err = 0.0;
  for (size_t k = 0; k < track.size(); ++k) {
    if (!track[k].detected) continue;
    const double err = std::hypot(track[k].x_mm - run.trajectory[k].x_mm,
                                  track[k].y_mm - run.trajectory[k].y_mm);
    max_err = std::max(max_err, err);
  }
  if (max_err >= 18.75) {
    ok = false;
    detail += "position error " + std::to_string(max_err) + " mm ";
  }

  // velocity estimate within 15 % RMS of the simulator's ground truth
  const auto vel = pipeline::estimate_velocity(track);
  double se = 0.0, st = 0.0;
  size_t vi = 0;
  for (size_t k = 0; k < track.size(); ++k) {
    if (!track[k].detected) continue;
    const double truth = run.trajectory[k].vx_mm_s;
    const double err = vel[vi].vx_mm_s - truth;
    se += err * err;
    st += truth * truth;
    ++vi;
  }
  const double rel_rms = std::sqrt(se) / std::sqrt(st);
  if (!(rel_rms < 0.15)) {
    ok = false;
    detail += "velocity RMS " + std::to_string(100.0 * rel_rms) + " % ";
  }

  char buf[64];
  std::snprintf(buf, sizeof(buf), "max err %.2f mm, vel RMS %.1f%%", max_err,
                100.0 * rel_rms);
  report("09 traverse localization", ok, detail.empty() ? buf : detail);
}

void check_sync_property(const lattice::CalibrationSet&) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);

  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    pipeline::TimedStream coarse;
    for (int k = 0; k <= 100; ++k)
      coarse.samples.push_back({0.1 * k, {0.0}}); // uniform 10 Hz, [0, 10] s
    pipeline::TimedStream fine;
    double t = 0.05;
    while (t < 9.9) {
      fine.samples.push_back({t, {0.0}});
      t += 0.013 * jitter(rng);
    }

    const auto pairs = pipeline::nearest_neighbor_sync(fine, coarse);
    const double bound = 0.5 * coarse.median_period_s();
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].dt_s > bound + 1e-12) ok = false;
      // exhaustive-scan oracle
      size_t best = 0;
      for (size_t j = 1; j < coarse.samples.size(); ++j)
        if (std::abs(coarse.samples[j].t_s - fine.samples[i].t_s) <
            std::abs(coarse.samples[best].t_s - fine.samples[i].t_s))
          best = j;
      if (pairs[i].index_b != best) ok = false;
    }
  }
  report("10 multi-rate sync alignment", ok);
}

void check_optimizer_soundness(const lattice::CalibrationSet& calib,
                               const dynamics::FrictionModel& friction) {
  const auto scn = flat_impulse(0.10, 500.0, 10.0, 3.0);
  optimizer::GuidanceGoal goal;
  goal.target_cell = 6;
  optimizer::MapSpace space;
  space.kind = optimizer::MapSpace::Kind::ColumnBands; // 81 candidates

  const auto candidates = optimizer::enumerate_space(space);
  double best_cost = std::numeric_limits<double>::infinity();
  sensing::StiffnessMap best_map = candidates.front();
  for (const auto& cand : candidates) {
    const double cost =
        optimizer::evaluate(cand, scn, goal, calib, friction).cost;
    if (cost < best_cost) {
      best_cost = cost;
      best_map = cand;
    }
  }

  const auto a = optimizer::optimize(goal, scn, space, 200, 1, calib, friction,
                                     true);
  const auto b = optimizer::optimize(goal, scn, space, 200, 99, calib, friction,
                                     false); // different seed and ordering

  const bool ok = a.exhaustive && a.best_cost == best_cost &&
                  a.best_map.density == best_map.density &&
                  b.best_cost == a.best_cost &&
                  b.best_map.density == a.best_map.density;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "best cost %.4f", a.best_cost);
  report("11 layout search soundness", ok, buf);
}

} // namespace

int main() {
  const auto calib = lattice::CalibrationSet::builtin();
  const auto friction = dynamics::FrictionModel::builtin();

  check_table_round_trip(calib);
  check_scaling_ratios(calib);
  check_hysteresis_ordering(calib);
  check_initiation_tilts(calib, friction);
  check_stopping_distances(calib, friction);
  check_boundary_deceleration(calib, friction);
  check_crosstalk(calib);
  check_repeatability(calib);
  check_localization(calib, friction);
  check_sync_property(calib);
  check_optimizer_soundness(calib, friction);

  std::printf("%d of 11 checks failed\n", g_failures);
  return g_failures;
}
