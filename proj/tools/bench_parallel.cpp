// SPDX-License-Identifier: Apache-2.0
//
// Compares the serial reference evaluation kernel against the OpenMP one on
// a column-band layout enumeration and checks that both agree.
#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "copess/optimizer.hpp"

using namespace copess;
using Clock = std::chrono::steady_clock;

int main() {
  const auto calibration = lattice::CalibrationSet::builtin();
  const auto friction = dynamics::FrictionModel::builtin();

  dynamics::Scenario tmpl;
  tmpl.map = sensing::StiffnessMap::uniform(0.10);
  tmpl.schedule = dynamics::TiltSchedule({{0.0, 0.0}});
  tmpl.initial.x_mm = 10.0;
  tmpl.initial.y_mm = 56.25;
  tmpl.initial.vx_mm_s = 500.0;
  tmpl.duration_s = 5.0;

  optimizer::GuidanceGoal goal;
  goal.kind = optimizer::GoalKind::StopInCell;
  goal.target_cell = 6;

  optimizer::MapSpace space;
  space.kind = optimizer::MapSpace::Kind::ColumnBands;
  const auto candidates = optimizer::enumerate_space(space);
  std::printf("candidates: %zu\n", candidates.size());
#ifdef _OPENMP
  std::printf("omp threads: %d\n", omp_get_max_threads());
#else
  std::printf("omp threads: (compiled without OpenMP)\n");
#endif

  auto t0 = Clock::now();
  const auto serial = optimizer::evaluate_batch(candidates, tmpl, goal,
                                                calibration, friction, false);
  auto t1 = Clock::now();
  const auto parallel = optimizer::evaluate_batch(candidates, tmpl, goal,
                                                  calibration, friction, true);
  auto t2 = Clock::now();

  double max_diff = 0.0;
  for (size_t i = 0; i < serial.size(); ++i)
    max_diff = std::fmax(max_diff, std::fabs(serial[i].cost - parallel[i].cost));

  const double ms_serial =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  const double ms_parallel =
      std::chrono::duration<double, std::milli>(t2 - t1).count();
  std::printf("serial:   %8.1f ms\n", ms_serial);
  std::printf("parallel: %8.1f ms  (speedup %.2fx)\n", ms_parallel,
              ms_serial / ms_parallel);
  std::printf("max cost difference: %g\n", max_diff);
  return max_diff == 0.0 ? 0 : 1;
}
