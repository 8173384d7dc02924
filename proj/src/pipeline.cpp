#include "mvmf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mvmf/tuning.hpp"

namespace mvmf {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

EstimateOutput run_estimate(const Scenario& sc, const std::vector<DrifterTrack>& tracks,
                            const std::string& out_dir) {
  if (tracks.size() < 2) {
    throw ScenarioError("estimation needs at least two tracks (leave-one-out holdout)");
  }
  fs::create_directories(out_dir);

  std::vector<DrifterTrack> smoothed;
  for (const auto& tr : tracks) {
    smoothed.push_back(kalman_smooth(tr, sc.estimator.process_noise, sc.estimator.meas_noise_m));
  }

  GridSearchOptions gs_opts;
  gs_opts.subsample_interval_s = sc.estimator.subsample_s;
  GridSearchResult gs =
      grid_search(sc.workspace, smoothed, sc.estimator.grid, smoothed.front().id, gs_opts);

  std::vector<Measurement> meas;
  for (const auto& tr : smoothed) {
    auto m = track_to_measurements(tr, sc.estimator.subsample_s);
    meas.insert(meas.end(), m.begin(), m.end());
  }
  EstimatedField field = fit_divergence_free_gp(sc.workspace, meas, gs.best);

  // Raster the posterior mean onto a plot-ready grid.
  const double sp = sc.estimator.raster_spacing_m;
  const Rect& ws = sc.workspace;
  int nx = static_cast<int>(std::floor(ws.width() / sp)) + 1;
  int ny = static_cast<int>(std::floor(ws.height() / sp)) + 1;
  std::vector<double> u(static_cast<size_t>(nx) * ny), v(u.size());
  std::ostringstream cov;
  cov << "x_m,y_m,cov_trace\n";
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      Vec2 p{ws.xmin + ix * sp, ws.ymin + iy * sp};
      Vec2 vel = field.velocity(p, 0.0);
      u[static_cast<size_t>(iy) * nx + ix] = vel.x;
      v[static_cast<size_t>(iy) * nx + ix] = vel.y;
      cov << p.x << ',' << p.y << ',' << field.covariance_trace(p) << '\n';
    }
  }
  GridField raster({ws.xmin, ws.ymin}, sp, nx, ny, std::move(u), std::move(v));

  EstimateOutput out;
  out.best = gs.best;
  out.holdout_error_m = gs.best_score;
  out.field_path = out_dir + "/field.json";
  out.covariance_path = out_dir + "/covariance.csv";
  write_file(out.field_path, raster.to_json());
  write_file(out.covariance_path, cov.str());
  write_file(out_dir + "/tracks_smoothed.csv", tracks_to_csv(smoothed));

  // Divergence of the analytic posterior, sampled well inside the workspace.
  const double h = 0.5;
  IncompressibilityReport inc =
      incompressibility_report(field, ws.shrunk(2.0 * h), ws.width() / 10.0, 1e-6, 0.0, h);

  json rep;
  rep["hyperparams"] = {{"length_scale_m", gs.best.length_scale},
                       {"signal_std_mps", gs.best.signal_std},
                       {"noise_std_mps", gs.best.noise_std}};
  rep["holdout_error_m"] = gs.best_score;
  rep["holdout_id"] = smoothed.front().id;
  rep["measurement_count"] = meas.size();
  rep["max_abs_divergence_per_s"] = inc.max_abs_divergence;
  rep["divergence_violations"] = inc.violations.size();
  json grid_entries = json::array();
  for (const auto& e : gs.entries) {
    grid_entries.push_back({{"length_scale_m", e.hp.length_scale},
                            {"signal_std_mps", e.hp.signal_std},
                            {"noise_std_mps", e.hp.noise_std},
                            {"score_m", e.score},
                            {"failed", e.failed},
                            {"error", e.error}});
  }
  rep["grid"] = grid_entries;
  write_file(out_dir + "/estimate_report.json", rep.dump(2) + "\n");
  return out;
}

json plan_to_json(const Scenario& sc, const PlanOutput& plan) {
  json j;
  j["seed"] = sc.seed;
  const PlannerConfig& c = sc.planner.config;
  j["config"] = {{"n_samples", sc.planner.n_samples},
                 {"drift_duration_s", sc.planner.drift_duration_s},
                 {"max_actions", sc.planner.max_actions},
                 {"mcts_iterations", c.mcts_iterations},
                 {"decmcts_rounds", c.decmcts_rounds},
                 {"decmcts_iterations", c.decmcts_iterations},
                 {"plan_distribution_size", c.plan_distribution_size},
                 {"unattended_weight", c.unattended_weight},
                 {"wake_avoidance", c.wake_avoidance},
                 {"wake_radius_m", c.wake_radius}};

  json acts = json::array();
  for (const auto& a : plan.actions) {
    json path = json::array();
    for (const auto& s : a.drift.samples) path.push_back(json::array({s.t, s.p.x, s.p.y}));
    acts.push_back({{"id", a.id},
                    {"drop", vec_json(a.drop_pos)},
                    {"pick", vec_json(a.pick_pos)},
                    {"earliest_drop_s", a.earliest_drop_s},
                    {"drift_s", a.drift_s},
                    {"covered", a.covered},
                    {"path", path}});
  }
  j["actions"] = acts;
  j["selected"] = plan.selected;

  json sched;
  sched["makespan_s"] = plan.schedule.makespan();
  sched["float_of_action"] = plan.schedule.float_of_action;
  json vessels = json::array();
  for (size_t vi = 0; vi < plan.schedule.by_vessel.size(); ++vi) {
    json evs = json::array();
    for (const auto& e : plan.schedule.by_vessel[vi]) {
      evs.push_back({{"action", e.action_id},
                     {"kind", e.kind == EventKind::kDrop ? "drop" : "pick"},
                     {"t", e.time_s},
                     {"pos", vec_json(e.pos)}});
    }
    vessels.push_back({{"index", vi}, {"events", evs}});
  }
  sched["vessels"] = vessels;
  j["schedule"] = sched;

  if (plan.has_transits) {
    json legs = json::array();
    for (const auto& leg : plan.transits.legs) {
      json wps = json::array();
      for (const auto& w : leg.waypoints) wps.push_back(vec_json(w));
      legs.push_back({{"vessel", leg.vessel},
                      {"depart_s", leg.depart_s},
                      {"arrive_s", leg.arrive_s},
                      {"induced_delay_s", leg.induced_delay_s},
                      {"rerouted", leg.rerouted},
                      {"waypoints", wps}});
    }
    j["transits"] = {{"max_induced_delay_s", plan.transits.max_induced_delay_s},
                     {"legs", legs}};
  }
  if (plan.oracle_makespan >= 0.0) j["oracle_makespan_s"] = plan.oracle_makespan;
  return j;
}

void plan_from_json(const json& j, std::vector<CandidateAction>* actions,
                    std::vector<int>* selected, Schedule* schedule, TransitPlan* transits,
                    bool* has_transits) {
  actions->clear();
  for (const auto& a : j.at("actions")) {
    CandidateAction ca;
    ca.id = a.at("id");
    ca.drop_pos = vec_from(a.at("drop"));
    ca.pick_pos = vec_from(a.at("pick"));
    ca.earliest_drop_s = a.at("earliest_drop_s");
    ca.drift_s = a.at("drift_s");
    ca.covered = a.at("covered").get<std::vector<int>>();
    for (const auto& s : a.at("path")) {
      ca.drift.samples.push_back({s.at(0).get<double>(), vec_from(json::array({s.at(1), s.at(2)}))});
    }
    if (ca.drift.samples.size() >= 2) {
      ca.drift.dt = ca.drift.samples[1].t - ca.drift.samples[0].t;
    }
    actions->push_back(std::move(ca));
  }
  *selected = j.at("selected").get<std::vector<int>>();

  const json& sched = j.at("schedule");
  schedule->by_vessel.clear();
  schedule->float_of_action = sched.at("float_of_action").get<std::vector<int>>();
  for (const auto& vj : sched.at("vessels")) {
    std::vector<ScheduledEvent> evs;
    for (const auto& e : vj.at("events")) {
      ScheduledEvent ev;
      ev.action_id = e.at("action");
      ev.kind = e.at("kind") == "drop" ? EventKind::kDrop : EventKind::kPick;
      ev.time_s = e.at("t");
      ev.pos = vec_from(e.at("pos"));
      evs.push_back(ev);
    }
    schedule->by_vessel.push_back(std::move(evs));
  }

  *has_transits = j.contains("transits");
  transits->legs.clear();
  transits->max_induced_delay_s = 0.0;
  if (*has_transits) {
    const json& tj = j["transits"];
    transits->max_induced_delay_s = tj.at("max_induced_delay_s");
    for (const auto& lj : tj.at("legs")) {
      TransitLeg leg;
      leg.vessel = lj.at("vessel");
      leg.depart_s = lj.at("depart_s");
      leg.arrive_s = lj.at("arrive_s");
      leg.induced_delay_s = lj.at("induced_delay_s");
      leg.rerouted = lj.at("rerouted");
      for (const auto& w : lj.at("waypoints")) leg.waypoints.push_back(vec_from(w));
      transits->legs.push_back(std::move(leg));
    }
  }
}

PlanOutput run_plan(const Scenario& sc, const FlowField& field, const std::string& out_dir,
                    bool oracle_check) {
  if (sc.vessels.empty()) throw ScenarioError("scenario has no vessels");
  fs::create_directories(out_dir);

  std::vector<CandidateAction> candidates =
      sample_actions(field, sc.workspace, sc.planner.n_samples, sc.planner.drift_duration_s,
                     sc.pois, sc.seed);
  std::vector<int> picked =
      select_actions_mcts(candidates, sc.pois, sc.planner.max_actions, sc.planner.config);
  if (picked.empty()) throw InfeasibleError("no viable drop/pick actions in the workspace");

  PlanOutput out;
  // Re-id the chosen actions 0..k-1; the schedule and sim index this list.
  for (int idx : picked) {
    CandidateAction a = candidates[idx];
    a.id = static_cast<int>(out.actions.size());
    out.selected.push_back(a.id);
    out.actions.push_back(std::move(a));
  }

  out.schedule = schedule_decmcts(sc.vessels, out.actions, sc.planner.config);

  if (oracle_check) {
    if (out.actions.size() * 2 > 10) {
      throw ScenarioError("--oracle-check needs at most 10 scheduled events");
    }
    Schedule oracle = exhaustive_schedule(sc.vessels, out.actions);
    out.oracle_makespan = oracle.makespan();
  }

  if (sc.planner.config.wake_avoidance) {
    WakeAvoidOptions wopts;
    wopts.idle_point = sc.workspace.center();
    wopts.use_idle_point = sc.sim.wait_policy == SimParams::WaitPolicy::kCentroid;
    out.transits = plan_wake_safe_transits(out.schedule, sc.vessels, out.actions,
                                           sc.planner.config.wake_radius, sc.workspace, wopts);
    if (out.transits.max_induced_delay_s > 0.0) {
      out.schedule = retime_schedule(out.schedule, sc.vessels, out.actions, out.transits);
      out.transits = plan_wake_safe_transits(out.schedule, sc.vessels, out.actions,
                                             sc.planner.config.wake_radius, sc.workspace, wopts);
    }
    out.has_transits = true;
  }

  out.plan_path = out_dir + "/plan.json";
  write_file(out.plan_path, plan_to_json(sc, out).dump(2) + "\n");
  return out;
}

json mission_log_to_json(const MissionLog& log) {
  json j;
  json trajs;
  for (const auto& [name, pts] : log.trajectories) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(json::array({p.t, p.p.x, p.p.y, p.received}));
    trajs[name] = std::move(arr);
  }
  j["trajectories"] = std::move(trajs);
  json evs = json::array();
  for (const auto& e : log.events) {
    evs.push_back({{"t", e.t},
                   {"kind", e.kind},
                   {"action", e.action_id},
                   {"vessel", e.vessel},
                   {"pos", vec_json(e.pos)},
                   {"scheduled_s", e.scheduled_s}});
  }
  j["events"] = std::move(evs);
  j["tardiness_by_action"] = log.tardiness_by_action;
  j["deviation_by_action"] = log.deviation_by_action;
  j["progress_by_action"] = log.progress_by_action;
  j["lost_floats"] = log.lost_floats;
  return j;
}

MissionLog mission_log_from_json(const json& j) {
  MissionLog log;
  for (const auto& [name, arr] : j.at("trajectories").items()) {
    std::vector<TrackPoint> pts;
    for (const auto& p : arr) {
      pts.push_back({p.at(0).get<double>(),
                     {p.at(1).get<double>(), p.at(2).get<double>()},
                     p.at(3).get<bool>()});
    }
    log.trajectories[name] = std::move(pts);
  }
  for (const auto& e : j.at("events")) {
    MissionEvent ev;
    ev.t = e.at("t");
    ev.kind = e.at("kind");
    ev.action_id = e.at("action");
    ev.vessel = e.at("vessel");
    ev.pos = vec_from(e.at("pos"));
    ev.scheduled_s = e.at("scheduled_s");
    log.events.push_back(std::move(ev));
  }
  log.tardiness_by_action = j.at("tardiness_by_action").get<std::map<int, double>>();
  log.deviation_by_action = j.at("deviation_by_action").get<std::map<int, double>>();
  log.progress_by_action = j.at("progress_by_action").get<std::map<int, double>>();
  log.lost_floats = j.at("lost_floats");
  return log;
}

namespace {

/// Trajectories of adrift floats, rebuilt from the log for crossing checks.
std::vector<std::pair<std::string, Trajectory>> float_trajectories(const MissionLog& log) {
  std::vector<std::pair<std::string, Trajectory>> out;
  for (const auto& [name, pts] : log.trajectories) {
    if (name.rfind("float", 0) != 0 || pts.size() < 2) continue;
    Trajectory tr;
    for (const auto& p : pts) tr.samples.push_back({p.t, p.p});
    tr.dt = pts[1].t - pts[0].t;
    out.emplace_back(name, std::move(tr));
  }
  return out;
}

json build_report(const MissionLog& log, const Schedule& schedule) {
  TardinessReport tard = tardiness_report(log, schedule);
  json rep;
  rep["tardiness"] = {{"mean_s", tard.mean}, {"max_s", tard.max}, {"by_event", tard.by_event}};
  rep["deviation_by_action"] = log.deviation_by_action;
  rep["progress_by_action"] = log.progress_by_action;
  rep["lost_floats"] = log.lost_floats;

  auto floats = float_trajectories(log);
  json crossings = json::array();
  for (size_t i = 0; i < floats.size(); ++i) {
    for (size_t k = i + 1; k < floats.size(); ++k) {
      for (const auto& c : detect_crossings(floats[i].second, floats[k].second)) {
        crossings.push_back({{"a", floats[i].first},
                             {"b", floats[k].first},
                             {"pos", vec_json(c.pos)},
                             {"t_a", c.t_a},
                             {"t_b", c.t_b}});
      }
    }
  }
  rep["float_crossings"] = crossings;

  int detours = 0;
  for (const auto& e : log.events) {
    if (e.kind == "detour") ++detours;
  }
  rep["detour_events"] = detours;
  return rep;
}

}  // namespace

SimulateOutput run_simulate(const Scenario& sc, const json& plan, const SimulateOptions& opts,
                            const std::string& out_dir) {
  fs::create_directories(out_dir);

  std::vector<CandidateAction> actions;
  std::vector<int> selected;
  Schedule schedule;
  TransitPlan transits;
  bool has_transits = false;
  plan_from_json(plan, &actions, &selected, &schedule, &transits, &has_transits);

  if (schedule.by_vessel.size() != sc.vessels.size()) {
    throw ScenarioError("plan was made for " + std::to_string(schedule.by_vessel.size()) +
                        " vessels but the scenario has " + std::to_string(sc.vessels.size()));
  }

  const double delay = opts.start_delay_s;
  if (delay > 0.0) {
    for (auto& seq : schedule.by_vessel) {
      for (auto& e : seq) e.time_s += delay;
    }
    for (auto& leg : transits.legs) {
      leg.depart_s += delay;
      leg.arrive_s += delay;
    }
  }

  std::shared_ptr<const FlowField> truth = sc.truth;
  if (opts.rotate_deg_per_hour != 0.0) {
    double rate = opts.rotate_deg_per_hour * std::numbers::pi / 180.0 / 3600.0;
    truth = std::make_shared<RotatingField>(truth, rate);
  }

  SimParams params = sc.sim;
  if (opts.wake_override == 0) params.wake_enabled = false;
  if (opts.wake_override == 1) params.wake_enabled = true;

  WorldState world;
  world.clock = delay;
  world.truth = truth;
  world.rng.seed(params.seed);
  for (size_t i = 0; i < sc.vessels.size(); ++i) {
    VesselState vs;
    vs.id = static_cast<int>(i);
    vs.pos = sc.vessels[i].start;
    vs.speed = sc.vessels[i].speed;
    world.vessels.push_back(vs);
  }

  SimulateOutput out;
  out.log = execute_schedule(schedule, sc.vessels, actions, std::move(world), params,
                             has_transits ? &transits : nullptr);
  out.tardiness = tardiness_report(out.log, schedule);

  write_file(out_dir + "/trajectories.csv", out.log.trajectories_csv());
  write_file(out_dir + "/events.jsonl", out.log.events_jsonl());
  write_file(out_dir + "/mission.geojson", out.log.geojson());
  write_file(out_dir + "/mission_log.json", mission_log_to_json(out.log).dump(2) + "\n");

  json rep = build_report(out.log, schedule);
  rep["start_delay_s"] = delay;
  rep["rotate_deg_per_hour"] = opts.rotate_deg_per_hour;
  rep["wake_enabled"] = params.wake_enabled;
  out.report_path = out_dir + "/report.json";
  write_file(out.report_path, rep.dump(2) + "\n");
  return out;
}

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  return j;
}

}  // namespace

std::string run_evaluate(const std::string& log_path, const std::string& plan_path,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  MissionLog log = mission_log_from_json(load_json(log_path));
  std::vector<CandidateAction> actions;
  std::vector<int> selected;
  Schedule schedule;
  TransitPlan transits;
  bool has_transits = false;
  plan_from_json(load_json(plan_path), &actions, &selected, &schedule, &transits,
                 &has_transits);
  std::string path = out_dir + "/report.json";
  write_file(path, build_report(log, schedule).dump(2) + "\n");
  return path;
}

std::vector<std::string> run_replay(const std::string& log_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  MissionLog log = mission_log_from_json(load_json(log_path));
  std::vector<std::string> paths = {out_dir + "/trajectories.csv", out_dir + "/events.jsonl",
                                    out_dir + "/mission.geojson"};
  write_file(paths[0], log.trajectories_csv());
  write_file(paths[1], log.events_jsonl());
  write_file(paths[2], log.geojson());
  return paths;
}

}  // namespace mvmf
