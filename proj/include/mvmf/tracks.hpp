#pragma once

#include <string>
#include <vector>

#include "mvmf/vec2.hpp"

namespace mvmf {

/// Single GPS position fix from a drifter.
struct RawFix {
  double t = 0.0;
  Vec2 p;
  double position_noise_std = 3.0;  // meters
  bool received = true;             // false during comm dropouts
  bool interpolated = false;        // set by the smoother for bridged gaps
};

struct DrifterTrack {
  std::string id;
  std::vector<RawFix> fixes;

  size_t received_count() const;
  double duration() const {
    return fixes.empty() ? 0.0 : fixes.back().t - fixes.front().t;
  }
};

/// Point velocity observation derived from consecutive received fixes.
struct Measurement {
  Vec2 p;
  Vec2 v;
  double t = 0.0;
  double velocity_noise_std = 0.01;  // m/s
};

/// Constant-velocity Kalman forward filter + RTS backward smoother over the
/// received fixes. Unreceived gaps are bridged by prediction and flagged
/// interpolated; times are preserved.
DrifterTrack kalman_smooth(const DrifterTrack& track, double process_noise_accel,
                           double meas_noise_m);

/// Central-difference velocities at subsampled fix times. Differences never
/// span a gap (unreceived or interpolated fixes).
std::vector<Measurement> track_to_measurements(const DrifterTrack& track,
                                               double subsample_interval_s);

/// CSV schema: drifter_id,time_s,x_m,y_m,received
std::vector<DrifterTrack> tracks_from_csv(const std::string& text);
std::string tracks_to_csv(const std::vector<DrifterTrack>& tracks);

}  // namespace mvmf
