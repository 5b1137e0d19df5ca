// SPDX-License-Identifier: Apache-2.0
#include "copess/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace copess::pipeline {

void TimedStream::validate() const {
  if (samples.empty()) throw ValidationError("empty stream");
  for (size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].t_s > samples[i - 1].t_s))
      throw ValidationError("stream timestamps must be strictly increasing");
}

double TimedStream::median_period_s() const {
  if (samples.size() < 2) throw ValidationError("need >= 2 samples for a period");
  std::vector<double> periods;
  periods.reserve(samples.size() - 1);
  for (size_t i = 1; i < samples.size(); ++i)
    periods.push_back(samples[i].t_s - samples[i - 1].t_s);
  std::sort(periods.begin(), periods.end());
  const size_t n = periods.size();
  return n % 2 ? periods[n / 2] : 0.5 * (periods[n / 2 - 1] + periods[n / 2]);
}

std::vector<PairedSample> nearest_neighbor_sync(const TimedStream& a,
                                                const TimedStream& b) {
  a.validate();
  b.validate();
  std::vector<PairedSample> pairs;
  pairs.reserve(a.samples.size());
  size_t j = 0;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    const double t = a.samples[i].t_s;
    // b timestamps increase, so the best index is non-decreasing in i.
    while (j + 1 < b.samples.size() &&
           std::abs(b.samples[j + 1].t_s - t) < std::abs(b.samples[j].t_s - t))
      ++j;
    pairs.push_back({i, j, std::abs(b.samples[j].t_s - t)});
  }
  return pairs;
}

LocalizationEstimate localize(const sensing::SensorFrame& frame,
                              const sensing::CoilArraySpec& array,
                              double noise_floor_uh) {
  LocalizationEstimate est;
  est.t_s = frame.timestamp_s;
  double wx = 0.0, wy = 0.0, wsum = 0.0;
  for (int cell = 0; cell < array.rows * array.cols; ++cell) {
    const double v = frame.delta_l_uh[static_cast<size_t>(cell)];
    if (v <= noise_floor_uh) continue;
    const auto [cx, cy] = array.center(cell);
    wx += v * cx;
    wy += v * cy;
    wsum += v;
  }
  if (wsum <= 0.0) return est; // no detection
  est.detected = true;
  est.x_mm = wx / wsum;
  est.y_mm = wy / wsum;
  est.confidence_uh = wsum;
  return est;
}

std::vector<VelocitySample> estimate_velocity(
    const std::vector<LocalizationEstimate>& track, int window) {
  if (window < 1) throw ValidationError("window must be >= 1");
  std::vector<const LocalizationEstimate*> pts;
  for (const auto& e : track)
    if (e.detected) pts.push_back(&e);
  const size_t n = pts.size();
  if (n < 2) throw ValidationError("need >= 2 detected estimates");

  std::vector<VelocitySample> raw(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i == 0 ? 0 : i - 1;
    const size_t hi = i + 1 < n ? i + 1 : i;
    const double dt = pts[hi]->t_s - pts[lo]->t_s;
    raw[i] = {pts[i]->t_s, (pts[hi]->x_mm - pts[lo]->x_mm) / dt,
              (pts[hi]->y_mm - pts[lo]->y_mm) / dt};
  }
  std::vector<VelocitySample> out(n);
  const int half = window / 2;
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= static_cast<size_t>(half) ? i - half : 0;
    const size_t hi = std::min(n - 1, i + half);
    double sx = 0.0, sy = 0.0;
    for (size_t k = lo; k <= hi; ++k) {
      sx += raw[k].vx_mm_s;
      sy += raw[k].vy_mm_s;
    }
    const double count = static_cast<double>(hi - lo + 1);
    out[i] = {raw[i].t_s, sx / count, sy / count};
  }
  return out;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("correlation undefined for constant curves");
  return sxy / std::sqrt(sxx * syy);
}

// Linear interpolation over (d, F) points sorted by d, clamped at the ends.
double interp_curve(const std::vector<lattice::CurveSample>& curve, double d) {
  if (d <= curve.front().displacement_mm) return curve.front().force_n;
  if (d >= curve.back().displacement_mm) return curve.back().force_n;
  for (size_t i = 1; i < curve.size(); ++i) {
    if (d <= curve[i].displacement_mm) {
      const auto& a = curve[i - 1];
      const auto& b = curve[i];
      const double span = b.displacement_mm - a.displacement_mm;
      if (span <= 0.0) return b.force_n;
      const double u = (d - a.displacement_mm) / span;
      return a.force_n + u * (b.force_n - a.force_n);
    }
  }
  return curve.back().force_n;
}

} // namespace

double repeatability_correlation_pct(
    const std::vector<std::vector<double>>& cycles, int head, int tail) {
  if (head < 1 || tail < 1) throw ValidationError("head and tail must be >= 1");
  if (cycles.size() < static_cast<size_t>(head + tail))
    throw ValidationError("need at least head + tail cycles");
  const size_t len = cycles.front().size();
  for (const auto& c : cycles)
    if (c.size() != len || len == 0)
      throw ValidationError("cycle curves must share one grid");
  std::vector<double> first(len, 0.0), last(len, 0.0);
  for (int k = 0; k < head; ++k)
    for (size_t i = 0; i < len; ++i)
      first[i] += cycles[static_cast<size_t>(k)][i];
  for (int k = 0; k < tail; ++k)
    for (size_t i = 0; i < len; ++i)
      last[i] += cycles[cycles.size() - 1 - static_cast<size_t>(k)][i];
  for (size_t i = 0; i < len; ++i) {
    first[i] /= head;
    last[i] /= tail;
  }
  return 100.0 * pearson(first, last);
}

CharacterizationMetrics characterize(const TimedStream& displacement_mm,
                                     const TimedStream& force_n,
                                     const TimedStream& inductance_uh) {
  displacement_mm.validate();
  force_n.validate();
  inductance_uh.validate();

  // Channel with the largest range carries the loaded pad's response.
  const size_t channels = inductance_uh.samples.front().values.size();
  size_t best_ch = 0;
  double best_range = -1.0;
  for (size_t ch = 0; ch < channels; ++ch) {
    double lo = inductance_uh.samples.front().values[ch], hi = lo;
    for (const auto& s : inductance_uh.samples) {
      lo = std::min(lo, s.values[ch]);
      hi = std::max(hi, s.values[ch]);
    }
    if (hi - lo > best_range) {
      best_range = hi - lo;
      best_ch = ch;
    }
  }

  const auto fp = nearest_neighbor_sync(displacement_mm, force_n);
  const auto lp = nearest_neighbor_sync(displacement_mm, inductance_uh);

  const size_t n = displacement_mm.samples.size();
  std::vector<double> d(n), f(n), l(n);
  for (size_t i = 0; i < n; ++i) {
    d[i] = displacement_mm.samples[i].values.at(0);
    f[i] = force_n.samples[fp[i].index_b].values.at(0);
    l[i] = inductance_uh.samples[lp[i].index_b].values.at(best_ch);
  }

  size_t peak = 0;
  for (size_t i = 1; i < n; ++i)
    if (d[i] > d[peak]) peak = i;
  const double d_peak = d[peak];
  if (!(d_peak > 0.0) || peak == 0 || peak == n - 1 ||
      d.back() > 0.05 * d_peak)
    throw ValidationError("incomplete cycle: need a full loading/unloading sweep");

  std::vector<lattice::CurveSample> loading, unloading;
  for (size_t i = 0; i <= peak; ++i) loading.push_back({d[i], f[i]});
  for (size_t i = peak; i < n; ++i) unloading.push_back({d[i], f[i]});
  std::sort(unloading.begin(), unloading.end(),
            [](const auto& a, const auto& b) {
              return a.displacement_mm < b.displacement_mm;
            });

  CharacterizationMetrics metrics;
  metrics.effective_stiffness_n_per_mm = lattice::effective_stiffness(loading);
  metrics.operational_force_range_n = f[peak];

  const double df = f[peak] - f[0];
  if (!(df > 0.0)) throw ValidationError("incomplete cycle: no force sweep");
  metrics.sensitivity_uh_per_n = (l[peak] - l[0]) / df;

  const int grid_n = 201;
  std::vector<lattice::CurveSample> grid_load, grid_unload;
  for (int k = 0; k < grid_n; ++k) {
    const double dd = d_peak * static_cast<double>(k) / (grid_n - 1);
    grid_load.push_back({dd, interp_curve(loading, dd)});
    grid_unload.push_back({dd, interp_curve(unloading, dd)});
  }
  metrics.hysteresis_pct = lattice::hysteresis_metric(grid_load, grid_unload);
  return metrics;
}

} // namespace copess::pipeline
