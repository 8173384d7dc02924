#pragma once

#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mvmf/flowfield.hpp"
#include "mvmf/planner.hpp"
#include "mvmf/trajectory.hpp"
#include "mvmf/wake.hpp"

namespace mvmf {

/// Phenomenological vessel-wake disturbance: floats exposed to a recent
/// vessel pass are stalled by `stall` and pushed laterally off the vessel's
/// path while the exposure persists.
struct WakeModel {
  double d_wake = 15.0;        // meters
  double persistence_s = 120.0;
  double stall = 0.5;          // in [0, 1]
  double lateral_push = 0.02;  // m/s
  double deploy_grace_s = 30.0;    // vessel presence right after a drop is benign
  double retrieve_grace_s = 30.0;  // and during the final retrieval approach
};

struct CommModel {
  double range = 500.0;  // meters, LORA-like
  int receiver_vessel = 0;
};

enum class FloatPhase { kAboard, kAdrift, kRetrieved, kLost };

struct FloatUnit {
  int action_id = 0;
  FloatPhase phase = FloatPhase::kAboard;
  Vec2 pos;
  Vec2 last_fix;
  double last_fix_t = -1.0;
  double drop_time = -1.0;
  double drift_end = -1.0;  // scheduled end of the drift, for wake exemptions
};

struct VesselState {
  int id = 0;
  Vec2 pos;
  double speed = 2.0;
  Vec2 target;
  bool moving = false;
  std::deque<Trajectory::Sample> recent;  // wake memory window
};

struct SimParams {
  double dt = 1.0;
  double capture_radius = 5.0;
  double loss_horizon_s = 1800.0;
  double velocity_noise = 0.01;  // m/s, isotropic Gaussian on float advection
  double gps_noise = 3.0;        // m per fix
  bool wake_enabled = false;
  WakeModel wake;
  CommModel comm;
  enum class WaitPolicy { kHold, kCentroid } wait_policy = WaitPolicy::kCentroid;
  uint64_t seed = 1;
};

struct WorldState {
  double clock = 0.0;
  std::shared_ptr<const FlowField> truth;
  std::vector<VesselState> vessels;
  std::vector<FloatUnit> floats;
  std::mt19937_64 rng;
};

struct MissionEvent {
  double t = 0.0;
  std::string kind;  // drop | pick-attempt | detour | pick | loss
  int action_id = -1;
  int vessel = -1;
  Vec2 pos;
  double scheduled_s = -1.0;
};

struct TrackPoint {
  double t = 0.0;
  Vec2 p;
  bool received = true;
};

struct MissionLog {
  std::map<std::string, std::vector<TrackPoint>> trajectories;  // entity name -> samples
  std::vector<MissionEvent> events;
  std::map<int, double> tardiness_by_action;  // executed pick tardiness, seconds
  /// Mean executed-vs-expected distance per action over the drift window.
  std::map<int, double> deviation_by_action;
  /// Along-path progress of the executed drift against the planned path.
  std::map<int, double> progress_by_action;
  int lost_floats = 0;

  std::string trajectories_csv() const;
  std::string events_jsonl() const;
  std::string geojson(Vec2 local_origin = {}) const;
};

/// Wake velocity correction for one float: zero unless the vessel track came
/// within d_wake of the float in the last persistence window; otherwise
/// -stall * ambient plus a lateral push away from the vessel's path.
Vec2 wake_perturbation(const std::deque<Trajectory::Sample>& vessel_recent,
                       const Vec2& float_pos, double t, const Vec2& ambient,
                       const WakeModel& wm);

/// Advances the world one step: adrift floats advect through the truth field
/// plus velocity noise plus wake; vessels move toward their targets; each
/// adrift float's fix is logged, received iff within comm range of the
/// receiver vessel.
void step(WorldState& world, double dt, const SimParams& params, MissionLog* log);

/// Executes a schedule against the world. Vessels visit scheduled positions
/// (waiting if early); a missed pick triggers the field-trial detour policy:
/// retarget the float's last received fix, re-attempt until capture or until
/// the loss horizon expires.
MissionLog execute_schedule(const Schedule& schedule, const std::vector<Vessel>& vessels,
                            const std::vector<CandidateAction>& actions, WorldState world,
                            const SimParams& params, const TransitPlan* transits = nullptr);

struct CrossingEvent {
  Vec2 pos;
  double t_a = 0.0;
  double t_b = 0.0;
};

/// All pairwise polyline intersections between two tracks, with interpolated
/// passage times for each.
std::vector<CrossingEvent> detect_crossings(const Trajectory& track_a,
                                            const Trajectory& track_b);

struct TardinessReport {
  std::map<std::string, double> by_event;  // "drop:3" / "pick:3", clamped at zero
  double mean = 0.0;
  double max = 0.0;
};

TardinessReport tardiness_report(const MissionLog& log, const Schedule& schedule);

}  // namespace mvmf
