#pragma once

#include <vector>

#include "mvmf/flowfield.hpp"
#include "mvmf/vec2.hpp"

namespace mvmf {

/// Time-ordered advection path with a fixed integration step.
struct Trajectory {
  struct Sample {
    double t = 0.0;
    Vec2 p;
  };
  std::vector<Sample> samples;
  double dt = 0.0;
  /// True when integration stopped early because the path left the workspace.
  bool truncated = false;

  double duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
  }
  const Vec2& endpoint() const { return samples.back().p; }

  /// Linear interpolation at time t (clamped to the sampled span).
  Vec2 position_at(double t) const;

  /// Minimum distance from p to the sampled polyline.
  double distance_to(const Vec2& p) const;
};

/// Classic fixed-step RK4 advection through `field`, starting at `start` at
/// time t0. Truncates (and flags) if a step would leave the workspace.
Trajectory integrate_trajectory(const FlowField& field, const Vec2& start, double t0,
                                double duration, double dt);

/// Central-difference divergence du/dx + dv/dy with stencil step h.
/// The full stencil must lie inside the workspace.
double divergence_at(const FlowField& field, const Vec2& p, double t, double h = 1.0);

struct IncompressibilityReport {
  double max_abs_divergence = 0.0;
  Vec2 argmax;
  std::vector<Vec2> violations;  // sample points with |div| > tol
  int samples = 0;
};

/// Samples divergence on a regular grid over `region` and flags violations.
IncompressibilityReport incompressibility_report(const FlowField& field, const Rect& region,
                                                 double grid_step, double tol, double t = 0.0,
                                                 double h = 1.0);

}  // namespace mvmf
