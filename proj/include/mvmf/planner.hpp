#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvmf/flowfield.hpp"
#include "mvmf/trajectory.hpp"
#include "mvmf/vec2.hpp"

namespace mvmf {

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Poi {
  std::string id;
  Vec2 pos;
  double r_obs = 10.0;  // meters
};

/// Paired drop-off/pick-up with the forward-integrated drift between them.
struct CandidateAction {
  int id = 0;
  Vec2 drop_pos;
  double earliest_drop_s = 0.0;
  Vec2 pick_pos;          // drift endpoint
  double drift_s = 0.0;   // drift duration T
  Trajectory drift;
  std::vector<int> covered;  // indices into the POI list
  bool exits_workspace = false;
};

struct Vessel {
  std::string id;
  Vec2 start;
  double speed = 2.0;  // m/s
  int capacity = 2;    // floats carried at departure; never exceeded
};

enum class EventKind { kDrop, kPick };

struct ScheduledEvent {
  int action_id = 0;
  EventKind kind = EventKind::kDrop;
  double time_s = 0.0;
  Vec2 pos;
};

struct Schedule {
  std::vector<std::vector<ScheduledEvent>> by_vessel;  // parallel to vessel list
  std::vector<int> float_of_action;  // float id assigned to each action id

  double makespan() const;
  /// Sum over actions of scheduled pick time minus (drop time + T).
  double total_unattended(const std::vector<CandidateAction>& actions) const;
};

struct PlannerConfig {
  // Subset-selection MCTS.
  int mcts_iterations = 5000;
  double exploration = 1.4142135623730951;
  double count_penalty = 0.01;  // per action used, in POI units
  // Dec-MCTS.
  int decmcts_rounds = 10;
  int decmcts_iterations = 1500;  // per vessel per round
  int plan_distribution_size = 5;
  int peer_samples = 3;
  double unattended_weight = 0.5;  // cost seconds per second adrift past pick
  // Wake avoidance.
  bool wake_avoidance = false;
  double wake_radius = 15.0;  // meters
  uint64_t seed = 1;
};

/// Samples n drop positions uniformly in the workspace and forward-integrates
/// each for T seconds. Actions whose drift exits the workspace are kept but
/// flagged; selection skips them by default.
std::vector<CandidateAction> sample_actions(const FlowField& field, const Rect& workspace,
                                            int n, double drift_duration_s,
                                            const std::vector<Poi>& pois, uint64_t seed,
                                            double dt = 1.0);

/// UCT search over subsets of at most max_actions actions, maximizing unique
/// POI coverage with a small per-action penalty. Returns indices into
/// `actions`. The result always weakly dominates the best single action.
std::vector<int> select_actions_mcts(const std::vector<CandidateAction>& actions,
                                     const std::vector<Poi>& pois, int max_actions,
                                     const PlannerConfig& cfg);

/// Greedy set-cover baseline over the same candidate set (test oracle and
/// rollout-free reference).
std::vector<int> greedy_set_cover(const std::vector<CandidateAction>& actions,
                                  const std::vector<Poi>& pois, int max_actions);

int coverage_of(const std::vector<CandidateAction>& actions, const std::vector<int>& subset);

/// Joint timing of explicit per-vessel event sequences. Events are encoded as
/// 2*action_index + (0 drop, 1 pick), indexing into `actions`. Returns nullopt
/// with `reason` set when the sequences are infeasible (capacity, precedence,
/// or cyclic cross-vessel waits).
std::optional<Schedule> timed_schedule(const std::vector<Vessel>& vessels,
                                       const std::vector<CandidateAction>& actions,
                                       const std::vector<std::vector<int>>& sequences,
                                       std::string* reason = nullptr);

/// Validates all Schedule invariants; throws std::logic_error on violation.
void validate_schedule(const Schedule& s, const std::vector<Vessel>& vessels,
                       const std::vector<CandidateAction>& actions);

/// Decentralized MCTS allocation and sequencing: each vessel searches its own
/// event sequence and periodically exchanges a size-bounded distribution over
/// its best sequences; candidates are scored against samples of the peers'
/// plans. Cost is makespan plus the weighted expected unattended float time.
Schedule schedule_decmcts(const std::vector<Vessel>& vessels,
                          const std::vector<CandidateAction>& actions,
                          const PlannerConfig& cfg);

/// Exhaustive minimum-makespan oracle; instances limited to 10 events total.
/// Deterministic lexicographic tie-break over the flattened event list.
Schedule exhaustive_schedule(const std::vector<Vessel>& vessels,
                             const std::vector<CandidateAction>& actions);

double makespan(const Schedule& s);

/// One planned transit leg of a vessel, possibly rerouted around predicted
/// float drift paths.
struct TransitLeg {
  int vessel = 0;
  double depart_s = 0.0;
  std::vector<Vec2> waypoints;  // first = leg start, last = leg destination
  double arrive_s = 0.0;
  double induced_delay_s = 0.0;  // > 0 when the reroute breaks a scheduled time
  bool rerouted = false;
};

struct TransitPlan {
  std::vector<TransitLeg> legs;
  double max_induced_delay_s = 0.0;
};

struct WakeAvoidOptions {
  double grace_s = 30.0;     // samples right after a float's own drop don't count
  double sample_dt_s = 1.0;
  Vec2 idle_point;           // where vessels wait out long gaps
  bool use_idle_point = false;
};

/// Plans straight or rerouted waypoint paths for every vessel transit so that
/// no leg passes within d_wake of a float's predicted position at passage time
/// nor crosses a float's not-yet-traversed drift path. Reroutes go around the
/// offending trajectory's bounding box inflated by d_wake. Induced delays are
/// reported, never silently applied.
TransitPlan plan_wake_safe_transits(const Schedule& s, const std::vector<Vessel>& vessels,
                                    const std::vector<CandidateAction>& actions,
                                    double d_wake, const Rect& workspace,
                                    const WakeAvoidOptions& opts = {});

/// Shifts scheduled times to absorb the induced delays of a transit plan
/// (drops move to the rerouted arrival, picks stay at drop + T or later).
Schedule retime_schedule(const Schedule& s, const std::vector<Vessel>& vessels,
                         const std::vector<CandidateAction>& actions,
                         const TransitPlan& plan);

}  // namespace mvmf
