#pragma once

#include <optional>

#include "mvmf/vec2.hpp"

namespace mvmf {

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 <= 0.0) return distance(p, a);
  double t = (p - a).dot(ab) / len2;
  t = std::max(0.0, std::min(1.0, t));
  return distance(p, a + ab * t);
}

struct SegmentHit {
  Vec2 point;
  double s;  // parameter on [a0, a1]
  double t;  // parameter on [b0, b1]
};

/// Proper intersection of two closed segments. Collinear overlaps report the
/// first touching point.
inline std::optional<SegmentHit> segment_intersection(const Vec2& a0, const Vec2& a1,
                                                      const Vec2& b0, const Vec2& b1) {
  Vec2 r = a1 - a0;
  Vec2 s = b1 - b0;
  double denom = cross(r, s);
  Vec2 qp = b0 - a0;
  constexpr double eps = 1e-12;
  if (std::abs(denom) < eps) {
    if (std::abs(cross(qp, r)) > eps) return std::nullopt;  // parallel, disjoint
    // Collinear: project endpoints of b onto a.
    double rr = r.dot(r);
    if (rr < eps) {
      if (point_segment_distance(a0, b0, b1) < eps) return SegmentHit{a0, 0.0, 0.0};
      return std::nullopt;
    }
    double t0 = qp.dot(r) / rr;
    double t1 = (b1 - a0).dot(r) / rr;
    double lo = std::min(t0, t1), hi = std::max(t0, t1);
    double u = std::max(0.0, lo);
    if (u > std::min(1.0, hi)) return std::nullopt;
    Vec2 p = a0 + r * u;
    double ss = s.dot(s) > eps ? (p - b0).dot(s) / s.dot(s) : 0.0;
    return SegmentHit{p, u, ss};
  }
  double u = cross(qp, s) / denom;
  double v = cross(qp, r) / denom;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
  return SegmentHit{a0 + r * u, u, v};
}

}  // namespace mvmf
