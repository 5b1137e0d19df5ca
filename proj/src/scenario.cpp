// SPDX-License-Identifier: Apache-2.0
#include "copess/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace copess::io {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ValidationError("file not found: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  require_file(path);
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

double parse_field(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad numeric field '" + s + "' in " + context);
  }
}

} // namespace

ScenarioFile parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }

  ScenarioFile file;
  std::vector<std::string> violations;
  auto flag = [&](const std::string& msg) { violations.push_back(msg); };

  const std::string mode = j.value("mode", std::string("guidance"));
  if (mode == "guidance") file.mode = RunMode::Guidance;
  else if (mode == "cycle") file.mode = RunMode::Cycle;
  else flag("mode must be 'guidance' or 'cycle', got '" + mode + "'");

  // object
  if (j.contains("object")) {
    const auto& o = j["object"];
    file.scenario.object.mass_kg = o.value("mass_kg", 0.5);
    if (!(file.scenario.object.mass_kg > 0.0)) flag("object.mass_kg must be positive");
    if (o.contains("footprint")) {
      const auto& fp = o["footprint"];
      const std::string kind = fp.value("kind", std::string("disc"));
      if (kind == "point") {
        file.scenario.object.footprint = dynamics::FootprintKind::Point;
      } else if (kind == "disc") {
        file.scenario.object.footprint = dynamics::FootprintKind::Disc;
        file.scenario.object.footprint_radius_mm = fp.value("radius_mm", 37.5);
        if (!(file.scenario.object.footprint_radius_mm > 0.0))
          flag("object.footprint.radius_mm must be positive");
      } else {
        flag("object.footprint.kind must be 'point' or 'disc'");
      }
    }
    const std::string kind = o.value("kind", std::string("rigid"));
    if (kind == "rigid") file.scenario.object.kind = dynamics::ObjectKind::Rigid;
    else if (kind == "soft") file.scenario.object.kind = dynamics::ObjectKind::Soft;
    else flag("object.kind must be 'rigid' or 'soft'");
  }

  // map: 4x4 nested array or flat 16
  if (file.mode == RunMode::Guidance) {
    if (!j.contains("map")) {
      flag("missing 'map' (4x4 relative-density array)");
    } else {
      const auto& m = j["map"];
      std::vector<double> flat;
      bool shape_ok = true;
      if (m.is_array() && m.size() == sensing::kRows && m[0].is_array()) {
        for (const auto& row : m) {
          if (!row.is_array() || row.size() != sensing::kCols) {
            shape_ok = false;
            break;
          }
          for (const auto& v : row) flat.push_back(v.get<double>());
        }
      } else if (m.is_array() && m.size() == sensing::kCellCount &&
                 !m[0].is_array()) {
        for (const auto& v : m) flat.push_back(v.get<double>());
      } else {
        shape_ok = false;
      }
      if (!shape_ok || flat.size() != sensing::kCellCount) {
        flag("map must be a 4x4 array (or flat array of 16)");
      } else {
        for (int cell = 0; cell < sensing::kCellCount; ++cell) {
          file.scenario.map.density[static_cast<size_t>(cell)] = flat[static_cast<size_t>(cell)];
          lattice::LatticeSpec spec;
          spec.relative_density = flat[static_cast<size_t>(cell)];
          const auto report = lattice::check_printability(spec);
          for (const auto& v : report.violations)
            flag("map cell " + std::to_string(cell) + ": " + v);
        }
      }
    }
  }

  // tilt schedule
  if (j.contains("tilt_schedule")) {
    const auto& ts = j["tilt_schedule"];
    dynamics::Axis axis = dynamics::Axis::X;
    const std::string ax = ts.value("axis", std::string("x"));
    if (ax == "x") axis = dynamics::Axis::X;
    else if (ax == "y") axis = dynamics::Axis::Y;
    else flag("tilt_schedule.axis must be 'x' or 'y'");
    std::vector<dynamics::TiltSchedule::Knot> knots;
    for (const auto& k : ts.value("knots", json::array()))
      if (k.is_array() && k.size() == 2)
        knots.push_back({k[0].get<double>(), k[1].get<double>()});
      else
        flag("tilt_schedule.knots entries must be [t_s, angle_deg] pairs");
    if (!knots.empty()) {
      try {
        file.scenario.schedule = dynamics::TiltSchedule(knots, axis);
      } catch (const ValidationError& e) {
        flag(std::string("tilt_schedule: ") + e.what());
      }
    }
  }

  if (j.contains("initial")) {
    const auto& init = j["initial"];
    file.scenario.initial.x_mm = init.value("x_mm", 18.75);
    file.scenario.initial.y_mm = init.value("y_mm", 56.25);
    file.scenario.initial.vx_mm_s = init.value("vx_mm_s", 0.0);
    file.scenario.initial.vy_mm_s = init.value("vy_mm_s", 0.0);
  } else {
    file.scenario.initial.x_mm = 18.75;
    file.scenario.initial.y_mm = 56.25;
  }

  if (j.contains("sim")) {
    const auto& s = j["sim"];
    file.scenario.dt_s = s.value("dt_s", dynamics::kDefaultTimestepS);
    file.scenario.duration_s = s.value("duration_s", 0.0);
    file.scenario.frame_hz = s.value("frame_hz", dynamics::kDefaultFrameHz);
    file.scenario.seed = s.value("seed", std::uint64_t{0});
    if (!(file.scenario.dt_s > 0.0)) flag("sim.dt_s must be positive");
    if (file.scenario.duration_s < 0.0) flag("sim.duration_s must be >= 0");
    if (!(file.scenario.frame_hz > 0.0)) {
      flag("sim.frame_hz must be positive");
    } else if (file.scenario.dt_s > 0.0) {
      const double spf = 1.0 / (file.scenario.frame_hz * file.scenario.dt_s);
      if (std::abs(spf - std::llround(spf)) > 1e-9 || spf < 1.0)
        flag("sim.frame_hz must divide the integration rate 1/dt_s");
    }
  }

  if (j.contains("cycle")) {
    const auto& c = j["cycle"];
    file.cycle.relative_density = c.value("relative_density", 0.10);
    file.cycle.peak_displacement_mm = c.value("peak_mm", 6.0);
    file.cycle.rate_mm_s = c.value("rate_mm_s", 0.5);
    file.cycle.cell = c.value("cell", 5);
    file.cycle.sample_hz = c.value("sample_hz", 20.0);
    if (!(file.cycle.rate_mm_s > 0.0)) flag("cycle.rate_mm_s must be positive");
    if (!(file.cycle.peak_displacement_mm > 0.0 &&
          file.cycle.peak_displacement_mm <= lattice::kDensificationDispMm))
      flag("cycle.peak_mm must lie in (0, 6]");
    if (file.cycle.cell < 0 || file.cycle.cell >= sensing::kCellCount)
      flag("cycle.cell must lie in [0, 15]");
    lattice::LatticeSpec spec;
    spec.relative_density = file.cycle.relative_density;
    for (const auto& v : lattice::check_printability(spec).violations)
      flag("cycle.relative_density: " + v);
  } else if (file.mode == RunMode::Cycle) {
    flag("cycle mode requires a 'cycle' section");
  }

  if (j.contains("goal")) {
    const auto& g = j["goal"];
    GoalConfig cfg;
    const std::string kind = g.value("kind", std::string("stop_in_cell"));
    if (kind == "stop_in_cell") {
      cfg.goal.kind = optimizer::GoalKind::StopInCell;
      cfg.goal.target_cell = g.value("cell", 0);
    } else if (kind == "max_exit_speed") {
      cfg.goal.kind = optimizer::GoalKind::MaxExitSpeed;
      cfg.goal.speed_limit_mm_s = g.value("limit_mm_s", 0.0);
    } else if (kind == "corridor") {
      cfg.goal.kind = optimizer::GoalKind::Corridor;
      for (const auto& c : g.value("cells", json::array()))
        cfg.goal.corridor_cells.push_back(c.get<int>());
    } else {
      flag("goal.kind must be stop_in_cell, max_exit_speed, or corridor");
    }
    cfg.goal.objective_weight = g.value("weight", 1.0);
    cfg.goal.effort_weight = g.value("effort_weight", 0.0);
    cfg.budget = g.value("budget", 200);
    if (cfg.budget < 1) flag("goal.budget must be >= 1");
    if (g.contains("space")) {
      const auto& sp = g["space"];
      const std::string sk = sp.value("kind", std::string("column_bands"));
      if (sk == "uniform") cfg.space.kind = optimizer::MapSpace::Kind::Uniform;
      else if (sk == "half_tile") cfg.space.kind = optimizer::MapSpace::Kind::HalfTile;
      else if (sk == "column_bands") cfg.space.kind = optimizer::MapSpace::Kind::ColumnBands;
      else if (sk == "free") cfg.space.kind = optimizer::MapSpace::Kind::Free;
      else flag("goal.space.kind must be uniform, half_tile, column_bands, or free");
      if (sp.contains("densities")) {
        cfg.space.densities.clear();
        for (const auto& v : sp["densities"])
          cfg.space.densities.push_back(v.get<double>());
        for (double rho : cfg.space.densities) {
          lattice::LatticeSpec spec;
          spec.relative_density = rho;
          for (const auto& v : lattice::check_printability(spec).violations)
            flag("goal.space.densities: " + v);
        }
      }
      cfg.space.require_contiguity = sp.value("contiguity", false);
    }
    try {
      cfg.goal.validate();
    } catch (const ValidationError& e) {
      flag(std::string("goal: ") + e.what());
    }
    file.goal = cfg;
  }

  if (!violations.empty()) {
    std::string msg = "scenario validation failed:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ValidationError(msg);
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  return parse_scenario_json(read_text(path));
}

std::string scenario_to_json(const ScenarioFile& file) {
  json j;
  j["mode"] = file.mode == RunMode::Guidance ? "guidance" : "cycle";
  j["object"] = {
      {"mass_kg", file.scenario.object.mass_kg},
      {"kind",
       file.scenario.object.kind == dynamics::ObjectKind::Rigid ? "rigid" : "soft"},
  };
  if (file.scenario.object.footprint == dynamics::FootprintKind::Point)
    j["object"]["footprint"] = {{"kind", "point"}};
  else
    j["object"]["footprint"] = {
        {"kind", "disc"}, {"radius_mm", file.scenario.object.footprint_radius_mm}};
  json map = json::array();
  for (int row = 0; row < sensing::kRows; ++row) {
    json r = json::array();
    for (int col = 0; col < sensing::kCols; ++col)
      r.push_back(file.scenario.map.at_cell(row * sensing::kCols + col));
    map.push_back(r);
  }
  j["map"] = map;
  json knots = json::array();
  for (const auto& k : file.scenario.schedule.knots())
    knots.push_back(json::array({k.t_s, k.angle_deg}));
  j["tilt_schedule"] = {
      {"axis", file.scenario.schedule.axis() == dynamics::Axis::X ? "x" : "y"},
      {"knots", knots}};
  j["initial"] = {{"x_mm", file.scenario.initial.x_mm},
                  {"y_mm", file.scenario.initial.y_mm},
                  {"vx_mm_s", file.scenario.initial.vx_mm_s},
                  {"vy_mm_s", file.scenario.initial.vy_mm_s}};
  j["sim"] = {{"dt_s", file.scenario.dt_s},
              {"duration_s", file.scenario.duration_s},
              {"frame_hz", file.scenario.frame_hz},
              {"seed", file.scenario.seed}};
  if (file.mode == RunMode::Cycle)
    j["cycle"] = {{"relative_density", file.cycle.relative_density},
                  {"peak_mm", file.cycle.peak_displacement_mm},
                  {"rate_mm_s", file.cycle.rate_mm_s},
                  {"cell", file.cycle.cell},
                  {"sample_hz", file.cycle.sample_hz}};
  if (file.goal) {
    const auto& cfg = *file.goal;
    json g;
    switch (cfg.goal.kind) {
      case optimizer::GoalKind::StopInCell:
        g["kind"] = "stop_in_cell";
        g["cell"] = cfg.goal.target_cell;
        break;
      case optimizer::GoalKind::MaxExitSpeed:
        g["kind"] = "max_exit_speed";
        g["limit_mm_s"] = cfg.goal.speed_limit_mm_s;
        break;
      case optimizer::GoalKind::Corridor:
        g["kind"] = "corridor";
        g["cells"] = cfg.goal.corridor_cells;
        break;
    }
    g["weight"] = cfg.goal.objective_weight;
    g["effort_weight"] = cfg.goal.effort_weight;
    g["budget"] = cfg.budget;
    const char* sk = "column_bands";
    switch (cfg.space.kind) {
      case optimizer::MapSpace::Kind::Uniform: sk = "uniform"; break;
      case optimizer::MapSpace::Kind::HalfTile: sk = "half_tile"; break;
      case optimizer::MapSpace::Kind::ColumnBands: sk = "column_bands"; break;
      case optimizer::MapSpace::Kind::Free: sk = "free"; break;
    }
    g["space"] = {{"kind", sk},
                  {"densities", cfg.space.densities},
                  {"contiguity", cfg.space.require_contiguity}};
    j["goal"] = g;
  }
  return j.dump(2);
}

std::string scenario_digest(const ScenarioFile& file) {
  const std::string text = scenario_to_json(file);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x00000100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["scenario_digest"] = m.scenario_digest;
  j["calibration_source"] = m.calibration_source;
  j["seed"] = m.seed;
  j["outputs"] = m.outputs;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::vector<lattice::TableAnchor> read_anchor_csv(
    const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw ValidationError("empty anchor CSV: " + path.string());
  const std::string expected =
      "relative_density,k0_n_per_mm,f_op_n,sensitivity_uh_per_n,hysteresis_pct";
  if (line != expected)
    throw ValidationError("anchor CSV header must be '" + expected + "'");
  std::vector<lattice::TableAnchor> anchors;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw ValidationError("anchor CSV line " + std::to_string(lineno) +
                            ": expected 5 fields");
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    anchors.push_back({parse_field(fields[0], ctx), parse_field(fields[1], ctx),
                       parse_field(fields[2], ctx), parse_field(fields[3], ctx),
                       parse_field(fields[4], ctx)});
  }
  return anchors;
}

std::string calibration_to_json(const lattice::CalibrationSet& set) {
  json j;
  auto law_json = [](const lattice::DensityScalingLaw& law) {
    json l;
    l["coefficient"] = law.coefficient();
    l["exponent"] = law.exponent();
    json anchors = json::array();
    for (size_t i = 0; i < law.anchors().size(); ++i)
      anchors.push_back({{"relative_density", law.anchors()[i].relative_density},
                         {"value", law.anchors()[i].value},
                         {"log_residual", law.residuals()[i]}});
    l["anchors"] = anchors;
    return l;
  };
  j["k0_n_per_mm"] = law_json(set.k0_law());
  j["f_op_n"] = law_json(set.f_op_law());
  j["sensitivity_uh_per_n"] = law_json(set.sensitivity_law());
  j["hysteresis_pct"] = law_json(set.hysteresis_law());
  return j.dump(2);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<dynamics::TrajectoryRow>& rows) {
  std::ofstream out(path);
  out << "t_s,x_mm,y_mm,vx_mm_s,vy_mm_s,indent_mm,cell_density\n";
  for (const auto& r : rows)
    out << fmt(r.t_s) << ',' << fmt(r.x_mm) << ',' << fmt(r.y_mm) << ','
        << fmt(r.vx_mm_s) << ',' << fmt(r.vy_mm_s) << ','
        << fmt(r.indentation_mm) << ',' << fmt(r.cell_density) << '\n';
}

void write_frames_csv(const std::filesystem::path& path,
                      const std::vector<sensing::SensorFrame>& frames) {
  std::ofstream out(path);
  out << "t_s";
  for (int row = 0; row < sensing::kRows; ++row)
    for (int col = 0; col < sensing::kCols; ++col)
      out << ",c" << row << col;
  out << '\n';
  for (const auto& f : frames) {
    out << fmt(f.timestamp_s);
    for (double v : f.delta_l_uh) out << ',' << fmt(v);
    out << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path,
                      const std::string& value_header,
                      const std::vector<double>& t_s,
                      const std::vector<double>& values) {
  if (t_s.size() != values.size())
    throw ValidationError("series length mismatch");
  std::ofstream out(path);
  out << "t_s," << value_header << '\n';
  for (size_t i = 0; i < t_s.size(); ++i)
    out << fmt(t_s[i]) << ',' << fmt(values[i]) << '\n';
}

void write_track_csv(const std::filesystem::path& path,
                     const std::vector<pipeline::LocalizationEstimate>& track) {
  std::ofstream out(path);
  out << "t_s,x_mm,y_mm,confidence_uh\n";
  for (const auto& e : track) {
    if (!e.detected) continue;
    out << fmt(e.t_s) << ',' << fmt(e.x_mm) << ',' << fmt(e.y_mm) << ','
        << fmt(e.confidence_uh) << '\n';
  }
}

namespace {

pipeline::TimedStream read_csv_stream(const std::filesystem::path& path,
                                      size_t expected_values) {
  const std::string text = read_text(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw ValidationError("empty CSV: " + path.string());
  pipeline::TimedStream stream;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected_values + 1)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected " + std::to_string(expected_values + 1) +
                            " fields");
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    pipeline::TimedSample sample;
    sample.t_s = parse_field(fields[0], ctx);
    for (size_t i = 1; i < fields.size(); ++i)
      sample.values.push_back(parse_field(fields[i], ctx));
    stream.samples.push_back(std::move(sample));
  }
  stream.validate();
  if (stream.samples.size() >= 2)
    stream.nominal_rate_hz = 1.0 / stream.median_period_s();
  return stream;
}

} // namespace

pipeline::TimedStream read_frames_csv(const std::filesystem::path& path) {
  return read_csv_stream(path, sensing::kCellCount);
}

pipeline::TimedStream read_series_csv(const std::filesystem::path& path) {
  return read_csv_stream(path, 1);
}

std::string metrics_to_json(const pipeline::CharacterizationMetrics& m) {
  json j;
  j["effective_stiffness_n_per_mm"] = m.effective_stiffness_n_per_mm;
  j["operational_force_range_n"] = m.operational_force_range_n;
  j["sensitivity_uh_per_n"] = m.sensitivity_uh_per_n;
  j["hysteresis_pct"] = m.hysteresis_pct;
  return j.dump(2);
}

std::string map_to_json(const sensing::StiffnessMap& map) {
  json rows = json::array();
  for (int row = 0; row < sensing::kRows; ++row) {
    json r = json::array();
    for (int col = 0; col < sensing::kCols; ++col)
      r.push_back(map.at_cell(row * sensing::kCols + col));
    rows.push_back(r);
  }
  return json{{"map", rows}}.dump(2);
}

} // namespace copess::io
