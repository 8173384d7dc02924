#include "mvmf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvmf/geometry.hpp"

namespace mvmf {

Vec2 wake_perturbation(const std::deque<Trajectory::Sample>& vessel_recent,
                       const Vec2& float_pos, double t, const Vec2& ambient,
                       const WakeModel& wm) {
  double best = wm.d_wake;
  const Trajectory::Sample* nearest = nullptr;
  for (const auto& s : vessel_recent) {
    if (s.t < t - wm.persistence_s || s.t > t) continue;
    double d = distance(s.p, float_pos);
    if (d < best) {
      best = d;
      nearest = &s;
    }
  }
  if (!nearest) return {0.0, 0.0};
  Vec2 away = float_pos - nearest->p;
  double n = away.norm();
  Vec2 push = n > 1e-9 ? away * (wm.lateral_push / n) : Vec2{0.0, 0.0};
  return ambient * (-wm.stall) + push;
}

namespace {

Vec2 rk4_advect(const FlowField& field, const Vec2& p, double t, double dt) {
  const Rect& ws = field.workspace();
  auto clamp_ws = [&](Vec2 q) {
    q.x = std::clamp(q.x, ws.xmin, ws.xmax);
    q.y = std::clamp(q.y, ws.ymin, ws.ymax);
    return q;
  };
  Vec2 k1 = field.velocity(clamp_ws(p), t);
  Vec2 k2 = field.velocity(clamp_ws(p + k1 * (dt / 2)), t + dt / 2);
  Vec2 k3 = field.velocity(clamp_ws(p + k2 * (dt / 2)), t + dt / 2);
  Vec2 k4 = field.velocity(clamp_ws(p + k3 * dt), t + dt);
  return (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (1.0 / 6.0);
}

}  // namespace

void step(WorldState& world, double dt, const SimParams& params, MissionLog* log) {
  double t = world.clock;

  // Floats advect first, against the vessels' wake history up to t.
  for (auto& f : world.floats) {
    if (f.phase != FloatPhase::kAdrift) continue;
    Vec2 ambient = rk4_advect(*world.truth, f.pos, t, dt);
    std::normal_distribution<double> vn(0.0, params.velocity_noise);
    Vec2 noise{vn(world.rng), vn(world.rng)};
    Vec2 wake{0.0, 0.0};
    bool wake_window = t > f.drop_time + params.wake.deploy_grace_s &&
                       (f.drift_end < 0.0 || t < f.drift_end - params.wake.retrieve_grace_s);
    if (params.wake_enabled && wake_window) {
      for (const auto& v : world.vessels) {
        wake += wake_perturbation(v.recent, f.pos, t, ambient, params.wake);
      }
    }
    f.pos += ambient * dt + (noise + wake) * dt;
  }

  // Vessels advance toward their targets.
  for (auto& v : world.vessels) {
    if (v.moving) {
      Vec2 d = v.target - v.pos;
      double dist = d.norm();
      double reach = v.speed * dt;
      v.pos = dist <= reach ? v.target : v.pos + d * (reach / dist);
    }
    v.recent.push_back({t + dt, v.pos});
    while (!v.recent.empty() && v.recent.front().t < t + dt - params.wake.persistence_s) {
      v.recent.pop_front();
    }
  }

  world.clock = t + dt;

  // Fix logging: drifting floats broadcast blindly; received iff within range
  // of the receiver vessel.
  if (log) {
    const VesselState& rx = world.vessels[params.comm.receiver_vessel];
    for (auto& f : world.floats) {
      if (f.phase != FloatPhase::kAdrift) continue;
      std::normal_distribution<double> gn(0.0, params.gps_noise);
      Vec2 fix = f.pos + Vec2{gn(world.rng), gn(world.rng)};
      bool received = distance(f.pos, rx.pos) <= params.comm.range;
      if (received) {
        f.last_fix = fix;
        f.last_fix_t = world.clock;
      }
      log->trajectories["float" + std::to_string(f.action_id)].push_back(
          {world.clock, f.pos, received});
    }
    for (const auto& v : world.vessels) {
      log->trajectories["vessel" + std::to_string(v.id)].push_back({world.clock, v.pos, true});
    }
  }
}

namespace {

enum class Mode { kTransit, kDetour, kDone };

struct VesselController {
  size_t next_event = 0;
  Mode mode = Mode::kTransit;
  std::vector<Vec2> waypoints;  // remaining, last one is the event position
  size_t wp = 0;
  bool waypoints_set = false;
  double detour_deadline = 0.0;
};

double remaining_path_time(const VesselState& v, const std::vector<Vec2>& wps, size_t wp) {
  double len = 0.0;
  Vec2 prev = v.pos;
  for (size_t i = wp; i < wps.size(); ++i) {
    len += distance(prev, wps[i]);
    prev = wps[i];
  }
  return len / v.speed;
}

}  // namespace

MissionLog execute_schedule(const Schedule& schedule, const std::vector<Vessel>& vessels,
                            const std::vector<CandidateAction>& actions, WorldState world,
                            const SimParams& params, const TransitPlan* transits) {
  MissionLog log;
  const double dt = params.dt;
  const Rect ws = world.truth->workspace();
  const Vec2 centroid = ws.center();

  // Float inventory: one per action that is dropped somewhere in the schedule.
  world.floats.clear();
  for (const auto& seq : schedule.by_vessel) {
    for (const auto& e : seq) {
      if (e.kind == EventKind::kDrop) {
        FloatUnit f;
        f.action_id = e.action_id;
        f.pos = e.pos;
        f.last_fix = e.pos;
        world.floats.push_back(f);
      }
    }
  }
  std::sort(world.floats.begin(), world.floats.end(),
            [](const FloatUnit& a, const FloatUnit& b) { return a.action_id < b.action_id; });
  auto float_by_action = [&](int id) -> FloatUnit& {
    for (auto& f : world.floats) {
      if (f.action_id == id) return f;
    }
    throw std::logic_error("no float for action");
  };

  // Transit-plan legs per vessel, one per scheduled event, in order.
  std::vector<std::vector<const TransitLeg*>> legs(vessels.size());
  if (transits) {
    for (const auto& leg : transits->legs) legs[leg.vessel].push_back(&leg);
  }

  std::vector<VesselController> ctl(vessels.size());
  double end_guard = schedule.makespan() + params.loss_horizon_s + 600.0;

  auto all_done = [&]() {
    for (const auto& c : ctl) {
      if (c.mode != Mode::kDone) return false;
    }
    return true;
  };

  while (!all_done() && world.clock < end_guard) {
    double t = world.clock;

    for (size_t vi = 0; vi < ctl.size(); ++vi) {
      VesselController& c = ctl[vi];
      VesselState& v = world.vessels[vi];
      if (c.mode == Mode::kDone) {
        v.moving = false;
        continue;
      }
      const auto& seq = schedule.by_vessel[vi];
      if (c.next_event >= seq.size()) {
        c.mode = Mode::kDone;
        v.moving = false;
        continue;
      }
      const ScheduledEvent& ev = seq[c.next_event];

      if (c.mode == Mode::kTransit) {
        if (!c.waypoints_set) {
          c.waypoints.clear();
          if (transits && c.next_event < legs[vi].size()) {
            const auto& wpts = legs[vi][c.next_event]->waypoints;
            c.waypoints.assign(wpts.begin() + 1, wpts.end());  // first = current pos
          } else {
            if (params.wait_policy == SimParams::WaitPolicy::kCentroid) {
              double direct = distance(v.pos, ev.pos) / v.speed;
              double via = (distance(v.pos, centroid) + distance(centroid, ev.pos)) / v.speed;
              if (ev.time_s - t - via > 2.0 * dt) c.waypoints.push_back(centroid);
            }
            c.waypoints.push_back(ev.pos);
          }
          c.wp = 0;
          c.waypoints_set = true;
        }
        // Hold before the final approach so the vessel arrives on schedule
        // rather than loitering at the event position.
        bool final_leg = c.wp + 1 == c.waypoints.size();
        double travel = remaining_path_time(v, c.waypoints, c.wp);
        bool hold = final_leg && (t + travel < ev.time_s - 1.5 * dt) &&
                    distance(v.pos, c.waypoints[c.wp]) > 1e-9;
        v.target = c.waypoints[c.wp];
        v.moving = !hold;
      } else if (c.mode == Mode::kDetour) {
        const FloatUnit& f = float_by_action(ev.action_id);
        v.target = f.last_fix;
        v.moving = true;
      }
    }

    step(world, dt, params, &log);
    t = world.clock;

    // Arrivals and event execution.
    for (size_t vi = 0; vi < ctl.size(); ++vi) {
      VesselController& c = ctl[vi];
      VesselState& v = world.vessels[vi];
      if (c.mode == Mode::kDone) continue;
      const auto& seq = schedule.by_vessel[vi];
      const ScheduledEvent& ev = seq[c.next_event];

      auto advance = [&]() {
        ++c.next_event;
        c.waypoints_set = false;
        c.mode = c.next_event >= seq.size() ? Mode::kDone : Mode::kTransit;
      };

      if (c.mode == Mode::kTransit) {
        while (c.wp + 1 < c.waypoints.size() && distance(v.pos, c.waypoints[c.wp]) < 1e-6) {
          ++c.wp;
        }
        bool arrived = distance(v.pos, ev.pos) < 1e-6;
        if (!arrived) continue;
        if (ev.kind == EventKind::kDrop) {
          if (t + 1e-9 < ev.time_s - 1.5 * dt) continue;  // still early, hold
          FloatUnit& f = float_by_action(ev.action_id);
          f.phase = FloatPhase::kAdrift;
          f.pos = v.pos;
          f.last_fix = v.pos;
          f.drop_time = t;
          f.drift_end = t + actions[ev.action_id].drift_s;
          log.events.push_back({t, "drop", ev.action_id, static_cast<int>(vi), v.pos,
                                ev.time_s});
          advance();
        } else {
          if (t + 1e-9 < ev.time_s) continue;  // picks never execute early
          FloatUnit& f = float_by_action(ev.action_id);
          log.events.push_back({t, "pick-attempt", ev.action_id, static_cast<int>(vi), v.pos,
                                ev.time_s});
          if (distance(v.pos, f.pos) <= params.capture_radius) {
            f.phase = FloatPhase::kRetrieved;
            log.events.push_back({t, "pick", ev.action_id, static_cast<int>(vi), f.pos,
                                  ev.time_s});
            log.tardiness_by_action[ev.action_id] = std::max(0.0, t - ev.time_s);
            advance();
          } else {
            c.mode = Mode::kDetour;
            c.detour_deadline = ev.time_s + params.loss_horizon_s;
            log.events.push_back({t, "detour", ev.action_id, static_cast<int>(vi),
                                  f.last_fix, ev.time_s});
          }
        }
      } else if (c.mode == Mode::kDetour) {
        FloatUnit& f = float_by_action(ev.action_id);
        if (distance(v.pos, f.pos) <= params.capture_radius) {
          f.phase = FloatPhase::kRetrieved;
          log.events.push_back({t, "pick", ev.action_id, static_cast<int>(vi), f.pos,
                                ev.time_s});
          log.tardiness_by_action[ev.action_id] = std::max(0.0, t - ev.time_s);
          advance();
        } else if (t > c.detour_deadline) {
          f.phase = FloatPhase::kLost;
          ++log.lost_floats;
          log.events.push_back({t, "loss", ev.action_id, static_cast<int>(vi), f.pos,
                                ev.time_s});
          advance();
        } else if (distance(v.pos, f.last_fix) < 1e-6) {
          // Reached the stale fix and still no capture: re-issue the detour to
          // the latest received position.
          log.events.push_back({t, "detour", ev.action_id, static_cast<int>(vi), f.last_fix,
                                ev.time_s});
        }
      }
    }
  }

  // Executed-vs-expected diagnostics per action.
  for (const auto& seq : schedule.by_vessel) {
    for (const auto& e : seq) {
      if (e.kind != EventKind::kDrop) continue;
      const CandidateAction& a = actions[e.action_id];
      const FloatUnit& f = float_by_action(e.action_id);
      if (f.drop_time < 0.0) continue;
      auto it = log.trajectories.find("float" + std::to_string(e.action_id));
      if (it == log.trajectories.end()) continue;
      double shift = f.drop_time - a.drift.samples.front().t;
      double sum = 0.0;
      int n = 0;
      Vec2 final_pos = a.drop_pos;
      for (const auto& tp : it->second) {
        if (tp.t < f.drop_time || tp.t > f.drop_time + a.drift_s) continue;
        sum += distance(tp.p, a.drift.position_at(tp.t - shift));
        final_pos = tp.p;
        ++n;
      }
      if (n > 0) log.deviation_by_action[e.action_id] = sum / n;
      // Along-path progress: arc length of the nearest expected-path point.
      double best_d = std::numeric_limits<double>::infinity();
      double arc = 0.0, best_arc = 0.0;
      for (size_t i = 0; i + 1 < a.drift.samples.size(); ++i) {
        const Vec2& p0 = a.drift.samples[i].p;
        const Vec2& p1 = a.drift.samples[i + 1].p;
        double seg = distance(p0, p1);
        double d = point_segment_distance(final_pos, p0, p1);
        if (d < best_d) {
          best_d = d;
          Vec2 dir = p1 - p0;
          double tproj = seg > 1e-12 ? std::clamp((final_pos - p0).dot(dir) / (seg * seg), 0.0, 1.0)
                                     : 0.0;
          best_arc = arc + tproj * seg;
        }
        arc += seg;
      }
      log.progress_by_action[e.action_id] = best_arc;
    }
  }

  return log;
}

std::vector<CrossingEvent> detect_crossings(const Trajectory& track_a,
                                            const Trajectory& track_b) {
  if (track_a.samples.empty() || track_b.samples.empty()) {
    throw std::invalid_argument("detect_crossings: empty track");
  }
  std::vector<CrossingEvent> out;
  for (size_t i = 0; i + 1 < track_a.samples.size(); ++i) {
    const auto& a0 = track_a.samples[i];
    const auto& a1 = track_a.samples[i + 1];
    for (size_t j = 0; j + 1 < track_b.samples.size(); ++j) {
      const auto& b0 = track_b.samples[j];
      const auto& b1 = track_b.samples[j + 1];
      auto hit = segment_intersection(a0.p, a1.p, b0.p, b1.p);
      if (!hit) continue;
      out.push_back({hit->point, a0.t + hit->s * (a1.t - a0.t), b0.t + hit->t * (b1.t - b0.t)});
    }
  }
  return out;
}

TardinessReport tardiness_report(const MissionLog& log, const Schedule& schedule) {
  TardinessReport rep;
  double sum = 0.0;
  int n = 0;
  for (const auto& seq : schedule.by_vessel) {
    for (const auto& e : seq) {
      const char* kind = e.kind == EventKind::kDrop ? "drop" : "pick";
      const MissionEvent* found = nullptr;
      for (const auto& le : log.events) {
        if (le.action_id == e.action_id && le.kind == kind) found = &le;
      }
      if (!found) {
        // A lost float never produced a pick; its tardiness is undefined but
        // the action must at least appear in the log.
        bool lost = false;
        for (const auto& le : log.events) {
          if (le.action_id == e.action_id && le.kind == "loss") lost = true;
        }
        if (lost) continue;
        throw std::invalid_argument("tardiness_report: scheduled action " +
                                    std::to_string(e.action_id) + " absent from log");
      }
      double tard = std::max(0.0, found->t - e.time_s);
      rep.by_event[std::string(kind) + ":" + std::to_string(e.action_id)] = tard;
      sum += tard;
      rep.max = std::max(rep.max, tard);
      ++n;
    }
  }
  rep.mean = n > 0 ? sum / n : 0.0;
  return rep;
}

std::string MissionLog::trajectories_csv() const {
  std::ostringstream out;
  out << "entity,kind,time_s,x_m,y_m,received\n";
  out.precision(10);
  for (const auto& [name, samples] : trajectories) {
    std::string kind = name.rfind("vessel", 0) == 0 ? "vessel" : "float";
    for (const auto& s : samples) {
      out << name << ',' << kind << ',' << s.t << ',' << s.p.x << ',' << s.p.y << ','
          << (s.received ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string MissionLog::events_jsonl() const {
  std::ostringstream out;
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["kind"] = e.kind;
    j["action"] = e.action_id;
    j["vessel"] = e.vessel;
    j["x"] = e.pos.x;
    j["y"] = e.pos.y;
    j["scheduled"] = e.scheduled_s;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string MissionLog::geojson(Vec2 local_origin) const {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["local_origin"] = {{"x", local_origin.x}, {"y", local_origin.y},
                        {"note", "coordinates are meters east/north of this origin"}};
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& [name, samples] : trajectories) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"entity", name}};
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    for (const auto& s : samples) coords.push_back({s.p.x, s.p.y});
    f["geometry"] = {{"type", "LineString"}, {"coordinates", coords}};
    fc["features"].push_back(f);
  }
  return fc.dump(2);
}

}  // namespace mvmf
