#pragma once

#include <vector>

#include "mvmf/trajectory.hpp"
#include "mvmf/vec2.hpp"

namespace mvmf {

/// Vessel motion sampled in time.
struct TimedPath {
  std::vector<Trajectory::Sample> samples;

  Vec2 position_at(double t) const;
};

/// A float's predicted drift, wake-sensitive while adrift mid-drift.
struct FloatDriftWindow {
  int action_id = 0;
  Trajectory path;      // sample times are absolute (shifted to the drop time)
  double drop_s = 0.0;
  double end_s = 0.0;   // drop_s + drift duration
};

struct WakeConflict {
  int vessel = 0;
  int action_id = 0;
  double time_s = 0.0;
  Vec2 where;
  bool path_crossing = false;  // else proximity
};

/// Space-time conflict test between vessel motion and predicted float drifts:
/// a conflict is either the vessel passing within d_wake of a float's predicted
/// position, or a vessel segment crossing the portion of a drift path the float
/// has not yet traversed. Samples within `grace` of the float's own drop and
/// anything at or after its drift end (the retrieval approach) are exempt.
std::vector<WakeConflict> detect_wake_conflicts(const std::vector<TimedPath>& vessel_paths,
                                                const std::vector<FloatDriftWindow>& floats,
                                                double d_wake, double grace_s,
                                                double sample_dt_s = 1.0,
                                                double retrieve_grace_s = 30.0);

}  // namespace mvmf
