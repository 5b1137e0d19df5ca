// SPDX-License-Identifier: Apache-2.0
#include "copess/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace copess::lattice {

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Gyroid: return "gyroid";
    case Topology::SchwarzD: return "schwarz_d";
    case Topology::XCellStrut: return "x_cell_strut";
  }
  return "unknown";
}

std::optional<Topology> topology_from_string(const std::string& s) {
  if (s == "gyroid") return Topology::Gyroid;
  if (s == "schwarz_d") return Topology::SchwarzD;
  if (s == "x_cell_strut") return Topology::XCellStrut;
  return std::nullopt;
}

PrintabilityReport check_printability(const LatticeSpec& spec) {
  PrintabilityReport report;
  auto add = [&](const std::string& v) {
    report.printable = false;
    report.violations.push_back(v);
  };
  std::ostringstream os;
  if (spec.relative_density < kMinRelativeDensity) {
    os.str("");
    os << "relative density " << spec.relative_density
       << " below 7 % floor: structure cannot support itself";
    add(os.str());
  }
  if (spec.relative_density > kMaxRelativeDensity) {
    os.str("");
    os << "relative density " << spec.relative_density
       << " above 30 % ceiling: uncured resin trapped in cell cavities";
    add(os.str());
  }
  if (spec.cell_size_mm < kMinCellSizeMm) {
    os.str("");
    os << "cell size " << spec.cell_size_mm << " mm below 2.2 mm limit";
    add(os.str());
  }
  if (spec.cell_size_mm > kMaxCellSizeMm) {
    os.str("");
    os << "cell size " << spec.cell_size_mm << " mm above 4.0 mm limit";
    add(os.str());
  }
  if (!(spec.thickness_mm > 0.0)) add("thickness must be positive");
  if (!(spec.planar_side_mm > 0.0)) add("planar side must be positive");
  return report;
}

MechanicalModel::MechanicalModel(double k0, double f_op, double hysteresis,
                                 double exponent, double d_lin, double d_dens)
    : k0_(k0), f_op_(f_op), hysteresis_(hysteresis), exponent_(exponent),
      d_lin_(d_lin), d_dens_(d_dens) {
  if (!(k0 > 0.0)) throw CalibrationError("k0 must be positive");
  if (!(f_op > 0.0)) throw CalibrationError("F_op must be positive");
  if (!(hysteresis >= 0.0 && hysteresis < 1.0))
    throw CalibrationError("hysteresis ratio must lie in [0, 1)");
  if (!(exponent >= 1.0)) throw CalibrationError("stiffening exponent must be >= 1");
  if (!(d_lin > 0.0 && d_lin < d_dens))
    throw CalibrationError("d_lin must lie in (0, densification_disp)");
  // Closed form: F(d_dens) = k0*d_dens + c*(d_dens - d_lin)^p = f_op.
  c_ = (f_op_ - k0_ * d_dens_) / std::pow(d_dens_ - d_lin_, exponent_);
  // Strict monotonicity of the loading branch. For c >= 0 this always
  // holds; for c < 0 the slope is smallest at densification.
  if (c_ < 0.0) {
    const double min_slope =
        k0_ + exponent_ * c_ * std::pow(d_dens_ - d_lin_, exponent_ - 1.0);
    if (!(min_slope > 0.0))
      throw CalibrationError("anchors produce a non-monotone loading branch");
  }
}

double MechanicalModel::loading_force(double d) const {
  if (d < 0.0)
    throw OutOfRangeError("negative displacement");
  if (d > d_dens_ * (1.0 + 1e-12))
    throw OutOfRangeError("displacement beyond densification; response unreliable");
  d = std::min(d, d_dens_);
  if (d <= d_lin_) return k0_ * d;
  return k0_ * d + c_ * std::pow(d - d_lin_, exponent_);
}

double MechanicalModel::operational_force_range() const {
  return loading_force(d_dens_);
}

double MechanicalModel::peak_gap_scale(double d_peak) const {
  // max over d of F_load(d)*sin(pi*d/d_peak), located by grid scan plus
  // golden-section refinement.
  const int n = 2048;
  double best_d = 0.5 * d_peak;
  double best = -1.0;
  for (int i = 1; i < n; ++i) {
    const double d = d_peak * static_cast<double>(i) / n;
    const double v = loading_force(d) * std::sin(std::numbers::pi * d / d_peak);
    if (v > best) { best = v; best_d = d; }
  }
  double lo = std::max(0.0, best_d - d_peak / n);
  double hi = std::min(d_peak, best_d + d_peak / n);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  auto f = [&](double d) {
    return loading_force(d) * std::sin(std::numbers::pi * d / d_peak);
  };
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + inv_phi * (hi - lo); f2 = f(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - inv_phi * (hi - lo); f1 = f(x1);
    }
  }
  const double peak = std::max({best, f1, f2});
  return loading_force(d_peak) / peak;
}

double MechanicalModel::unloading_force(double d, double d_peak) const {
  if (d > d_peak * (1.0 + 1e-12))
    throw ValidationError("unloading displacement exceeds the cycle peak");
  if (d_peak <= 0.0) return 0.0;
  d = std::min(d, d_peak);
  const double f_load = loading_force(d);
  if (hysteresis_ == 0.0) return f_load;
  const double w =
      peak_gap_scale(d_peak) * std::sin(std::numbers::pi * d / d_peak);
  return f_load * (1.0 - hysteresis_ * w);
}

double MechanicalModel::displacement_for_force(double force) const {
  if (force < 0.0) throw ValidationError("negative force");
  if (force == 0.0) return 0.0;
  const double f_max = operational_force_range();
  if (force > f_max + 1e-12)
    throw DensificationError("load exceeds the operational force range");
  double lo = 0.0, hi = d_dens_;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = loading_force(mid);
    if (std::abs(f - force) <= 1e-9) return mid;
    (f < force ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DensityScalingLaw DensityScalingLaw::fit(std::vector<Anchor> anchors) {
  if (anchors.size() < 2)
    throw CalibrationError("need at least 2 anchors for a scaling law");
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& l, const Anchor& r) {
              return l.relative_density < r.relative_density;
            });
  for (size_t i = 0; i < anchors.size(); ++i) {
    if (!(anchors[i].relative_density > 0.0) || !(anchors[i].value > 0.0))
      throw CalibrationError("anchor densities and values must be positive");
    if (i > 0 && anchors[i].relative_density == anchors[i - 1].relative_density)
      throw CalibrationError("anchor densities must be distinct");
  }
  const size_t n = anchors.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> xs(n), ys(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = std::log(anchors[i].relative_density);
    ys[i] = std::log(anchors[i].value);
    mx += xs[i]; my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  DensityScalingLaw law;
  law.b_ = sxy / sxx;
  law.a_ = std::exp(my - law.b_ * mx);
  law.anchors_ = std::move(anchors);
  law.residuals_.resize(n);
  for (size_t i = 0; i < n; ++i)
    law.residuals_[i] = ys[i] - (std::log(law.a_) + law.b_ * xs[i]);
  return law;
}

double DensityScalingLaw::fitted(double rho) const {
  return a_ * std::pow(rho, b_);
}

double DensityScalingLaw::at(double rho) const {
  if (!(rho > 0.0)) throw ValidationError("relative density must be positive");
  const double x = std::log(rho);
  const size_t n = anchors_.size();
  double r;
  const double x0 = std::log(anchors_.front().relative_density);
  const double xn = std::log(anchors_.back().relative_density);
  if (x <= x0) {
    r = residuals_.front();
  } else if (x >= xn) {
    r = residuals_.back();
  } else {
    r = residuals_.back();
    for (size_t i = 1; i < n; ++i) {
      const double xa = std::log(anchors_[i - 1].relative_density);
      const double xb = std::log(anchors_[i].relative_density);
      if (x <= xb) {
        const double t = (x - xa) / (xb - xa);
        r = residuals_[i - 1] + t * (residuals_[i] - residuals_[i - 1]);
        break;
      }
    }
  }
  return std::exp(std::log(a_) + b_ * x + r);
}

const std::vector<TableAnchor>& builtin_anchors() {
  static const std::vector<TableAnchor> anchors = {
      {0.07, 0.37, 1.78, 39.04, 20.07},
      {0.10, 0.54, 3.61, 18.92, 17.00},
      {0.20, 2.52, 16.68, 1.70, 8.70},
  };
  return anchors;
}

double cell_size_force_factor(double cell_size_mm) {
  struct Knot { double size, factor; };
  static constexpr Knot knots[] = {
      {2.2, 1.0 / 1.70}, {3.0, 1.0}, {4.0, 1.0 / 1.35}};
  if (cell_size_mm < kMinCellSizeMm || cell_size_mm > kMaxCellSizeMm)
    throw ValidationError("cell size outside the printable 2.2-4.0 mm window");
  for (int i = 1; i < 3; ++i) {
    if (cell_size_mm <= knots[i].size) {
      const double t =
          (cell_size_mm - knots[i - 1].size) / (knots[i].size - knots[i - 1].size);
      return knots[i - 1].factor + t * (knots[i].factor - knots[i - 1].factor);
    }
  }
  return knots[2].factor;
}

CalibrationSet CalibrationSet::from_anchors(const std::vector<TableAnchor>& anchors) {
  if (anchors.size() < 2)
    throw CalibrationError("need at least 2 anchor rows");
  std::vector<Anchor> k0, fop, sens, hyst;
  for (const auto& a : anchors) {
    if (!(a.relative_density > 0.0 && a.k0_n_per_mm > 0.0 && a.f_op_n > 0.0 &&
          a.sensitivity_uh_per_n > 0.0 && a.hysteresis_pct > 0.0))
      throw CalibrationError("anchor values must all be positive");
    k0.push_back({a.relative_density, a.k0_n_per_mm});
    fop.push_back({a.relative_density, a.f_op_n});
    sens.push_back({a.relative_density, a.sensitivity_uh_per_n});
    hyst.push_back({a.relative_density, a.hysteresis_pct});
  }
  CalibrationSet set;
  set.k0_ = DensityScalingLaw::fit(std::move(k0));
  set.f_op_ = DensityScalingLaw::fit(std::move(fop));
  set.sensitivity_ = DensityScalingLaw::fit(std::move(sens));
  set.hysteresis_ = DensityScalingLaw::fit(std::move(hyst));
  set.anchors_ = anchors;
  std::sort(set.anchors_.begin(), set.anchors_.end(),
            [](const TableAnchor& l, const TableAnchor& r) {
              return l.relative_density < r.relative_density;
            });
  return set;
}

CalibrationSet CalibrationSet::builtin() {
  return from_anchors(builtin_anchors());
}

MechanicalModel CalibrationSet::model_for(double rho, double cell_size_mm,
                                          Topology topology) const {
  if (topology != Topology::Gyroid)
    throw ValidationError("no calibration data for topology '" +
                          to_string(topology) + "'; only gyroid is calibrated");
  LatticeSpec spec;
  spec.relative_density = rho;
  spec.cell_size_mm = cell_size_mm;
  const auto report = check_printability(spec);
  if (!report.printable) {
    std::string msg = "unprintable lattice spec:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw ValidationError(msg);
  }
  const double factor = cell_size_force_factor(cell_size_mm);
  return MechanicalModel(k0(rho), f_op(rho) * factor,
                         hysteresis_pct(rho) / 100.0);
}

double effective_stiffness(const std::vector<CurveSample>& loading) {
  double sfd = 0.0, sdd = 0.0;
  int count = 0;
  for (const auto& s : loading) {
    if (s.displacement_mm >= 0.0 && s.displacement_mm <= kLinearRegionEndMm) {
      sfd += s.force_n * s.displacement_mm;
      sdd += s.displacement_mm * s.displacement_mm;
      ++count;
    }
  }
  if (count < 2 || sdd == 0.0)
    throw ValidationError("need at least 2 samples with d in (0, 2] mm");
  return sfd / sdd;
}

double hysteresis_metric(const std::vector<CurveSample>& loading,
                         const std::vector<CurveSample>& unloading) {
  if (loading.size() != unloading.size() || loading.empty())
    throw ValidationError("branches must share a displacement grid");
  double gap = 0.0, full_scale = 0.0;
  for (size_t i = 0; i < loading.size(); ++i) {
    if (std::abs(loading[i].displacement_mm - unloading[i].displacement_mm) > 1e-9)
      throw ValidationError("branch displacement grids do not match");
    gap = std::max(gap, std::abs(loading[i].force_n - unloading[i].force_n));
    full_scale = std::max(full_scale, std::abs(loading[i].force_n));
  }
  if (full_scale == 0.0)
    throw ValidationError("full-scale loading force is zero");
  return 100.0 * gap / full_scale;
}

} // namespace copess::lattice
