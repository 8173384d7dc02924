#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmf/vec2.hpp"

namespace mvmf {

class OutOfWorkspaceError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Queryable 2D surface velocity field over a bounded workspace.
///
/// Implementations are immutable after construction and safe to share across
/// threads. The time argument exists so that time-varying wrappers fit the
/// same interface; static fields ignore it.
class FlowField {
 public:
  explicit FlowField(Rect workspace) : workspace_(workspace) {}
  virtual ~FlowField() = default;

  const Rect& workspace() const { return workspace_; }

  /// Time span over which the field is defined; [-inf, inf] for static fields.
  virtual std::pair<double, double> time_span() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  /// Raw query, no workspace check. Prefer velocity_at().
  virtual Vec2 velocity(const Vec2& p, double t) const = 0;

 private:
  Rect workspace_;
};

/// Checked query: p must be inside the workspace and t within the field's span.
Vec2 velocity_at(const FlowField& field, const Vec2& p, double t);

class UniformField : public FlowField {
 public:
  UniformField(Rect ws, Vec2 v) : FlowField(ws), v_(v) {}
  Vec2 velocity(const Vec2&, double) const override { return v_; }

 private:
  Vec2 v_;
};

/// Regular grid of velocity vectors with bilinear interpolation, row-major
/// storage (index = iy * nx + ix).
class GridField : public FlowField {
 public:
  GridField(Vec2 origin, double spacing, int nx, int ny, std::vector<double> u,
            std::vector<double> v);

  Vec2 velocity(const Vec2& p, double t) const override;

  Vec2 origin() const { return origin_; }
  double spacing() const { return spacing_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }

  std::string to_json() const;
  static GridField from_json(const std::string& text);

 private:
  Vec2 origin_;
  double spacing_;
  int nx_, ny_;
  std::vector<double> u_, v_;
};

/// 2D surface signature of wind-aligned Langmuir cells: uniform along-wind
/// transport plus a sinusoidal cross-wind component that converges on lines
/// spaced one wavelength apart. Deliberately compressible.
class LangmuirField : public FlowField {
 public:
  LangmuirField(Rect ws, double along_wind_speed, double cross_amplitude,
                double cell_wavelength, double phase, double wind_direction);

  Vec2 velocity(const Vec2& p, double t) const override;

  /// Signed cross-wind coordinate of p.
  double cross_coordinate(const Vec2& p) const;
  double cross_amplitude() const { return amplitude_; }
  double cell_wavelength() const { return wavelength_; }

 private:
  double speed_;
  double amplitude_;
  double wavelength_;
  double phase_;
  Vec2 along_;  // unit vector, wind direction
  Vec2 across_; // unit vector, 90 deg CCW from wind
};

/// Time-piecewise composition of static fields. Intervals are
/// [b_{i-1}, b_i) with the first interval starting at the first breakpoint
/// and the last field extending to the final breakpoint.
class PiecewiseConstantField : public FlowField {
 public:
  /// breakpoints has n+1 strictly increasing entries for n fields; field i is
  /// active on [breakpoints[i], breakpoints[i+1]).
  PiecewiseConstantField(std::vector<double> breakpoints,
                         std::vector<std::shared_ptr<const FlowField>> fields);

  std::pair<double, double> time_span() const override {
    return {breakpoints_.front(), breakpoints_.back()};
  }
  Vec2 velocity(const Vec2& p, double t) const override;

 private:
  std::vector<double> breakpoints_;
  std::vector<std::shared_ptr<const FlowField>> fields_;
};

/// Solid-body rotation about a center: v = omega x r. Divergence-free.
class SolidBodyRotationField : public FlowField {
 public:
  SolidBodyRotationField(Rect ws, Vec2 center, double omega)
      : FlowField(ws), center_(center), omega_(omega) {}
  Vec2 velocity(const Vec2& p, double) const override {
    return omega_ * (p - center_).perp();
  }

 private:
  Vec2 center_;
  double omega_;
};

/// Single recirculating gyre from the stream function
///   psi = amplitude * L/pi * sin(pi (x-xmin)/L) * sin(pi (y-ymin)/H)
/// scaled so the peak speed equals `peak_speed`. Divergence-free by
/// construction.
class GyreField : public FlowField {
 public:
  GyreField(Rect ws, double peak_speed);
  Vec2 velocity(const Vec2& p, double) const override;
  double stream_function(const Vec2& p) const;

 private:
  double peak_;
  double kx_, ky_;
};

/// Wraps a base field and rotates its pattern about the workspace center at a
/// constant angular rate, modelling slow drift of the ambient current.
class RotatingField : public FlowField {
 public:
  RotatingField(std::shared_ptr<const FlowField> base, double rate_rad_per_s);
  Vec2 velocity(const Vec2& p, double t) const override;

 private:
  std::shared_ptr<const FlowField> base_;
  double rate_;
  Vec2 center_;
};

}  // namespace mvmf
