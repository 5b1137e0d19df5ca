// SPDX-License-Identifier: Apache-2.0
//
// Signal-processing layer: multi-rate stream synchronization, localization
// from array frames, velocity estimation, and the characterization metrics
// suite. Runs on simulated and ingested CSV logs alike.
#pragma once

#include <cstddef>
#include <vector>

#include "copess/sensing.hpp"

namespace copess::pipeline {

inline constexpr double kDefaultNoiseFloorUh = 0.5;
inline constexpr int kDefaultVelocityWindow = 5;

struct TimedSample {
  double t_s;
  std::vector<double> values;
};

/// Ordered multi-channel samples with strictly increasing timestamps.
struct TimedStream {
  std::vector<TimedSample> samples;
  double nominal_rate_hz = 0.0;

  void validate() const;
  double median_period_s() const;
};

struct PairedSample {
  size_t index_a;
  size_t index_b;
  double dt_s; // |t_a - t_b|
};

/// For each sample of `a`, the `b` sample with minimal |dt|; ties break
/// toward the earlier b sample.
std::vector<PairedSample> nearest_neighbor_sync(const TimedStream& a,
                                                const TimedStream& b);

struct LocalizationEstimate {
  double t_s = 0.0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double confidence_uh = 0.0; // sum of above-floor responses
  bool detected = false;
};

/// Response-weighted centroid of coil centers over cells above the noise
/// floor; flagged no-detection when every channel is below it.
LocalizationEstimate localize(const sensing::SensorFrame& frame,
                              const sensing::CoilArraySpec& array,
                              double noise_floor_uh = kDefaultNoiseFloorUh);

struct VelocitySample {
  double t_s;
  double vx_mm_s;
  double vy_mm_s;
};

/// Central finite differences over detected estimates, smoothed by a
/// centered moving average (window truncated at the track ends).
std::vector<VelocitySample> estimate_velocity(
    const std::vector<LocalizationEstimate>& track,
    int window = kDefaultVelocityWindow);

/// Pearson correlation (x100) between the mean of the first `head` and the
/// mean of the last `tail` cycle curves. Curves must share one grid.
double repeatability_correlation_pct(
    const std::vector<std::vector<double>>& cycles, int head = 3, int tail = 3);

struct CharacterizationMetrics {
  double effective_stiffness_n_per_mm = 0.0;
  double operational_force_range_n = 0.0;
  double sensitivity_uh_per_n = 0.0; // average inductance-force slope
  double hysteresis_pct = 0.0;
};

/// Applies the four characterization definitions to synchronized
/// displacement, force, and inductance streams covering one full cycle.
/// Streams may run at different rates; force and inductance are aligned to
/// the displacement timestamps by nearest-neighbor pairing.
CharacterizationMetrics characterize(const TimedStream& displacement_mm,
                                     const TimedStream& force_n,
                                     const TimedStream& inductance_uh);

} // namespace copess::pipeline
