#include "mvmf/wake.hpp"

#include <algorithm>

#include "mvmf/geometry.hpp"

namespace mvmf {

Vec2 TimedPath::position_at(double t) const {
  if (samples.empty()) throw std::logic_error("empty timed path");
  if (t <= samples.front().t) return samples.front().p;
  if (t >= samples.back().t) return samples.back().p;
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const Trajectory::Sample& s, double tt) { return s.t < tt; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  double w = (t - a.t) / (b.t - a.t);
  return a.p + (b.p - a.p) * w;
}

std::vector<WakeConflict> detect_wake_conflicts(const std::vector<TimedPath>& vessel_paths,
                                                const std::vector<FloatDriftWindow>& floats,
                                                double d_wake, double grace_s,
                                                double sample_dt_s, double retrieve_grace_s) {
  std::vector<WakeConflict> out;
  if (d_wake <= 0.0) return out;
  const double end_slack = retrieve_grace_s;

  for (size_t vi = 0; vi < vessel_paths.size(); ++vi) {
    const TimedPath& vp = vessel_paths[vi];
    if (vp.samples.size() < 2) continue;
    double t0 = vp.samples.front().t, t1 = vp.samples.back().t;

    // Proximity sweep.
    for (const auto& f : floats) {
      double lo = std::max(t0, f.drop_s + grace_s);
      double hi = std::min(t1, f.end_s - end_slack);
      for (double t = lo; t <= hi; t += sample_dt_s) {
        Vec2 v = vp.position_at(t);
        Vec2 p = f.path.position_at(t);
        if (distance(v, p) < d_wake) {
          out.push_back({static_cast<int>(vi), f.action_id, t, p, false});
          break;  // one report per (vessel, float) is enough
        }
      }
    }

    // Crossing of not-yet-traversed drift path.
    for (const auto& f : floats) {
      bool hit = false;
      for (size_t i = 0; i + 1 < vp.samples.size() && !hit; ++i) {
        const auto& a0 = vp.samples[i];
        const auto& a1 = vp.samples[i + 1];
        if (a0.t >= f.end_s - end_slack) break;
        for (size_t j = 0; j + 1 < f.path.samples.size(); ++j) {
          const auto& b0 = f.path.samples[j];
          const auto& b1 = f.path.samples[j + 1];
          auto isect = segment_intersection(a0.p, a1.p, b0.p, b1.p);
          if (!isect) continue;
          double tv = a0.t + isect->s * (a1.t - a0.t);
          double tf = b0.t + isect->t * (b1.t - b0.t);
          // Only a conflict if the float reaches the crossing after the
          // vessel did, while still mid-drift and past its drop grace.
          if (tf >= tv && tf < f.end_s - end_slack && tf > f.drop_s + grace_s &&
              tv > f.drop_s + grace_s) {
            out.push_back({static_cast<int>(vi), f.action_id, tv, isect->point, true});
            hit = true;
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mvmf
