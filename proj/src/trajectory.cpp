#include "mvmf/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "mvmf/geometry.hpp"

namespace mvmf {

Vec2 Trajectory::position_at(double t) const {
  if (samples.empty()) throw std::logic_error("empty trajectory");
  if (t <= samples.front().t) return samples.front().p;
  if (t >= samples.back().t) return samples.back().p;
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const Sample& s, double tt) { return s.t < tt; });
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  double w = (t - a.t) / (b.t - a.t);
  return a.p + (b.p - a.p) * w;
}

double Trajectory::distance_to(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    best = std::min(best, point_segment_distance(p, samples[i].p, samples[i + 1].p));
  }
  if (samples.size() == 1) best = distance(p, samples[0].p);
  return best;
}

Trajectory integrate_trajectory(const FlowField& field, const Vec2& start, double t0,
                                double duration, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("integrate_trajectory: dt must be > 0");
  if (duration < dt) throw std::invalid_argument("integrate_trajectory: duration < dt");
  const Rect& ws = field.workspace();
  if (!ws.contains(start)) throw OutOfWorkspaceError("integrate_trajectory: start outside workspace");

  Trajectory traj;
  traj.dt = dt;
  traj.samples.push_back({t0, start});
  int steps = static_cast<int>(std::round(duration / dt));
  Vec2 p = start;
  for (int i = 0; i < steps; ++i) {
    double t = t0 + i * dt;
    Vec2 k1 = field.velocity(p, t);
    Vec2 p2 = p + k1 * (dt / 2.0);
    if (!ws.contains(p2)) { traj.truncated = true; break; }
    Vec2 k2 = field.velocity(p2, t + dt / 2.0);
    Vec2 p3 = p + k2 * (dt / 2.0);
    if (!ws.contains(p3)) { traj.truncated = true; break; }
    Vec2 k3 = field.velocity(p3, t + dt / 2.0);
    Vec2 p4 = p + k3 * dt;
    if (!ws.contains(p4)) { traj.truncated = true; break; }
    Vec2 k4 = field.velocity(p4, t + dt);
    Vec2 next = p + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
    if (!ws.contains(next)) { traj.truncated = true; break; }
    p = next;
    traj.samples.push_back({t + dt, p});
  }
  return traj;
}

double divergence_at(const FlowField& field, const Vec2& p, double t, double h) {
  if (h <= 0.0) throw std::invalid_argument("divergence_at: h must be > 0");
  const Rect& ws = field.workspace();
  Vec2 xp{p.x + h, p.y}, xm{p.x - h, p.y}, yp{p.x, p.y + h}, ym{p.x, p.y - h};
  if (!ws.contains(xp) || !ws.contains(xm) || !ws.contains(yp) || !ws.contains(ym)) {
    throw OutOfWorkspaceError("divergence_at: stencil exits workspace");
  }
  double dudx = (field.velocity(xp, t).x - field.velocity(xm, t).x) / (2.0 * h);
  double dvdy = (field.velocity(yp, t).y - field.velocity(ym, t).y) / (2.0 * h);
  return dudx + dvdy;
}

IncompressibilityReport incompressibility_report(const FlowField& field, const Rect& region,
                                                 double grid_step, double tol, double t,
                                                 double h) {
  if (grid_step <= 0.0) throw std::invalid_argument("incompressibility_report: grid_step <= 0");
  IncompressibilityReport rep;
  Rect inner = field.workspace().shrunk(h);
  for (double y = region.ymin; y <= region.ymax + 1e-9; y += grid_step) {
    for (double x = region.xmin; x <= region.xmax + 1e-9; x += grid_step) {
      Vec2 p{std::min(x, region.xmax), std::min(y, region.ymax)};
      if (!inner.contains(p)) continue;
      double div = divergence_at(field, p, t, h);
      ++rep.samples;
      if (std::abs(div) > rep.max_abs_divergence) {
        rep.max_abs_divergence = std::abs(div);
        rep.argmax = p;
      }
      if (std::abs(div) > tol) rep.violations.push_back(p);
    }
  }
  return rep;
}

}  // namespace mvmf
