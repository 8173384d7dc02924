#include "mvmf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace mvmf {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ScenarioError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

Vec2 parse_vec(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::shared_ptr<const FlowField> build_field(const json& spec, const Rect& ws) {
  std::string type = spec.at("type");
  if (type == "uniform") {
    check_keys(spec, "truth_field(uniform)", {"type", "u", "v"});
    return std::make_shared<UniformField>(ws, Vec2{spec.at("u"), spec.at("v")});
  }
  if (type == "gyre") {
    check_keys(spec, "truth_field(gyre)", {"type", "peak_speed"});
    return std::make_shared<GyreField>(ws, spec.at("peak_speed").get<double>());
  }
  if (type == "solid_rotation") {
    check_keys(spec, "truth_field(solid_rotation)", {"type", "center", "omega"});
    return std::make_shared<SolidBodyRotationField>(
        ws, parse_vec(spec.at("center"), "solid_rotation.center"), spec.at("omega"));
  }
  if (type == "langmuir") {
    check_keys(spec, "truth_field(langmuir)",
               {"type", "along_wind_speed", "cross_amplitude", "cell_wavelength", "phase",
                "wind_direction_deg"});
    double dir = spec.value("wind_direction_deg", 0.0) * std::numbers::pi / 180.0;
    return std::make_shared<LangmuirField>(ws, spec.at("along_wind_speed"),
                                           spec.at("cross_amplitude"),
                                           spec.at("cell_wavelength"),
                                           spec.value("phase", 0.0), dir);
  }
  if (type == "grid_file") {
    check_keys(spec, "truth_field(grid_file)", {"type", "path"});
    std::ifstream in(spec.at("path").get<std::string>());
    if (!in) throw ScenarioError("grid_file: cannot open " + spec.at("path").get<std::string>());
    std::stringstream buf;
    buf << in.rdbuf();
    return std::make_shared<GridField>(GridField::from_json(buf.str()));
  }
  if (type == "piecewise") {
    check_keys(spec, "truth_field(piecewise)", {"type", "breakpoints", "fields"});
    std::vector<double> bps = spec.at("breakpoints").get<std::vector<double>>();
    std::vector<std::shared_ptr<const FlowField>> fields;
    for (const auto& f : spec.at("fields")) fields.push_back(build_field(f, ws));
    return std::make_shared<PiecewiseConstantField>(bps, fields);
  }
  if (type == "rotating") {
    check_keys(spec, "truth_field(rotating)", {"type", "base", "deg_per_hour"});
    double rate = spec.at("deg_per_hour").get<double>() * std::numbers::pi / 180.0 / 3600.0;
    return std::make_shared<RotatingField>(build_field(spec.at("base"), ws), rate);
  }
  throw ScenarioError("unknown truth_field type '" + type + "'");
}

Scenario parse_scenario(const json& j) {
  check_keys(j, "scenario",
             {"workspace", "truth_field", "fleet", "pois", "drifters", "estimator", "planner",
              "sim", "seed"});
  Scenario sc;

  if (j.contains("workspace")) {
    const auto& w = j["workspace"];
    check_keys(w, "workspace", {"xmin", "ymin", "xmax", "ymax"});
    sc.workspace = {w.at("xmin"), w.at("ymin"), w.at("xmax"), w.at("ymax")};
    if (sc.workspace.width() <= 0.0 || sc.workspace.height() <= 0.0) {
      throw ScenarioError("workspace: empty rectangle");
    }
  }
  sc.seed = j.value("seed", 1);

  sc.truth_spec = j.at("truth_field");
  sc.truth = build_field(sc.truth_spec, sc.workspace);

  if (j.contains("fleet")) {
    const auto& f = j["fleet"];
    check_keys(f, "fleet", {"vessels", "floats"});
    for (const auto& v : f.at("vessels")) {
      check_keys(v, "fleet.vessels[]", {"id", "start", "speed_mps", "capacity"});
      Vessel vv;
      vv.id = v.at("id");
      vv.start = parse_vec(v.at("start"), "vessel.start");
      vv.speed = v.at("speed_mps");
      vv.capacity = v.at("capacity");
      if (vv.speed <= 0.0) throw ScenarioError("vessel speed must be > 0");
      if (vv.capacity < 1) throw ScenarioError("vessel capacity must be >= 1");
      sc.vessels.push_back(vv);
    }
    sc.float_count = f.value("floats", 2);
  }

  if (j.contains("pois")) {
    for (const auto& q : j["pois"]) {
      check_keys(q, "pois[]", {"id", "pos", "r_obs"});
      Poi poi;
      poi.id = q.at("id");
      poi.pos = parse_vec(q.at("pos"), "poi.pos");
      poi.r_obs = q.value("r_obs", 10.0);
      if (poi.r_obs <= 0.0) throw ScenarioError("poi r_obs must be > 0");
      sc.pois.push_back(poi);
    }
  }

  if (j.contains("drifters")) {
    const auto& d = j["drifters"];
    check_keys(d, "drifters",
               {"count", "formation", "center", "spacing_m", "duration_s", "fix_interval_s",
                "gps_noise_m"});
    sc.drifters.count = d.value("count", 3);
    sc.drifters.formation = d.value("formation", "triangle");
    sc.drifters.center = d.contains("center") ? parse_vec(d["center"], "drifters.center")
                                              : sc.workspace.center();
    sc.drifters.spacing_m = d.value("spacing_m", 60.0);
    sc.drifters.duration_s = d.value("duration_s", 600.0);
    sc.drifters.fix_interval_s = d.value("fix_interval_s", 1.0);
    sc.drifters.gps_noise_m = d.value("gps_noise_m", 3.0);
  } else {
    sc.drifters.center = sc.workspace.center();
  }

  if (j.contains("estimator")) {
    const auto& e = j["estimator"];
    check_keys(e, "estimator",
               {"subsample_s", "length_scales", "signal_stds", "noise_stds", "process_noise",
                "meas_noise_m", "raster_spacing_m"});
    sc.estimator.subsample_s = e.value("subsample_s", 30.0);
    if (e.contains("length_scales")) {
      sc.estimator.grid.length_scales = e["length_scales"].get<std::vector<double>>();
    }
    if (e.contains("signal_stds")) {
      sc.estimator.grid.signal_stds = e["signal_stds"].get<std::vector<double>>();
    }
    if (e.contains("noise_stds")) {
      sc.estimator.grid.noise_stds = e["noise_stds"].get<std::vector<double>>();
    }
    sc.estimator.process_noise = e.value("process_noise", 0.005);
    sc.estimator.meas_noise_m = e.value("meas_noise_m", 3.0);
    sc.estimator.raster_spacing_m = e.value("raster_spacing_m", 1.0);
  }

  if (j.contains("planner")) {
    const auto& p = j["planner"];
    check_keys(p, "planner",
               {"n_samples", "drift_duration_s", "max_actions", "mcts_iterations",
                "decmcts_rounds", "decmcts_iterations", "plan_distribution_size",
                "unattended_weight", "wake_avoidance", "wake_radius"});
    sc.planner.n_samples = p.value("n_samples", 200);
    sc.planner.drift_duration_s = p.value("drift_duration_s", 600.0);
    sc.planner.max_actions = p.value("max_actions", 5);
    sc.planner.config.mcts_iterations = p.value("mcts_iterations", 5000);
    sc.planner.config.decmcts_rounds = p.value("decmcts_rounds", 10);
    sc.planner.config.decmcts_iterations = p.value("decmcts_iterations", 1500);
    sc.planner.config.plan_distribution_size = p.value("plan_distribution_size", 5);
    sc.planner.config.unattended_weight = p.value("unattended_weight", 0.5);
    sc.planner.config.wake_avoidance = p.value("wake_avoidance", false);
    sc.planner.config.wake_radius = p.value("wake_radius", 15.0);
  }

  if (j.contains("sim")) {
    const auto& s = j["sim"];
    check_keys(s, "sim",
               {"dt_s", "capture_radius_m", "loss_horizon_s", "velocity_noise_mps",
                "gps_noise_m", "comm_range_m", "wait_policy", "wake"});
    sc.sim.dt = s.value("dt_s", 1.0);
    sc.sim.capture_radius = s.value("capture_radius_m", 5.0);
    sc.sim.loss_horizon_s = s.value("loss_horizon_s", 1800.0);
    sc.sim.velocity_noise = s.value("velocity_noise_mps", 0.01);
    sc.sim.gps_noise = s.value("gps_noise_m", 3.0);
    sc.sim.comm.range = s.value("comm_range_m", 500.0);
    std::string wp = s.value("wait_policy", "centroid");
    if (wp == "centroid") {
      sc.sim.wait_policy = SimParams::WaitPolicy::kCentroid;
    } else if (wp == "hold") {
      sc.sim.wait_policy = SimParams::WaitPolicy::kHold;
    } else {
      throw ScenarioError("sim.wait_policy must be 'centroid' or 'hold'");
    }
    if (s.contains("wake")) {
      const auto& w = s["wake"];
      check_keys(w, "sim.wake",
                 {"d_wake_m", "persistence_s", "stall", "lateral_push_mps", "deploy_grace_s",
                  "retrieve_grace_s"});
      sc.sim.wake.d_wake = w.value("d_wake_m", 15.0);
      sc.sim.wake.persistence_s = w.value("persistence_s", 120.0);
      sc.sim.wake.stall = w.value("stall", 0.5);
      sc.sim.wake.lateral_push = w.value("lateral_push_mps", 0.02);
      sc.sim.wake.deploy_grace_s = w.value("deploy_grace_s", 30.0);
      sc.sim.wake.retrieve_grace_s = w.value("retrieve_grace_s", 30.0);
      if (sc.sim.wake.stall < 0.0 || sc.sim.wake.stall > 1.0) {
        throw ScenarioError("sim.wake.stall must be in [0, 1]");
      }
    }
  }
  sc.sim.seed = sc.seed;
  sc.planner.config.seed = sc.seed;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("scenario parse error: " + std::string(e.what()));
  }
  return parse_scenario(j);
}

std::vector<DrifterTrack> synthesize_tracks(const Scenario& sc, const FlowField& field,
                                            double t0) {
  const DrifterSpec& d = sc.drifters;
  std::vector<Vec2> starts;
  if (d.formation == "triangle") {
    for (int i = 0; i < d.count; ++i) {
      double ang = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / std::max(d.count, 1);
      starts.push_back(d.center + Vec2{std::cos(ang), std::sin(ang)} * d.spacing_m);
    }
  } else if (d.formation == "line") {
    for (int i = 0; i < d.count; ++i) {
      double off = (i - (d.count - 1) / 2.0) * d.spacing_m;
      starts.push_back(d.center + Vec2{off, 0.0});
    }
  } else {
    throw ScenarioError("unknown drifter formation '" + d.formation + "'");
  }

  std::mt19937_64 rng(sc.seed ^ 0x5eedD21f7e25ULL);
  std::normal_distribution<double> gps(0.0, d.gps_noise_m);
  std::vector<DrifterTrack> tracks;
  for (size_t i = 0; i < starts.size(); ++i) {
    Trajectory traj =
        integrate_trajectory(field, starts[i], t0, d.duration_s, d.fix_interval_s);
    DrifterTrack tr;
    tr.id = "d" + std::to_string(i);
    for (const auto& s : traj.samples) {
      RawFix f;
      f.t = s.t;
      f.p = d.gps_noise_m > 0.0 ? s.p + Vec2{gps(rng), gps(rng)} : s.p;
      f.position_noise_std = std::max(d.gps_noise_m, 1e-6);
      tr.fixes.push_back(f);
    }
    tracks.push_back(std::move(tr));
  }
  return tracks;
}

}  // namespace mvmf
