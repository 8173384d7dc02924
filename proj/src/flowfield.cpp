#include "mvmf/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace mvmf {

Vec2 velocity_at(const FlowField& field, const Vec2& p, double t) {
  if (!field.workspace().contains(p)) {
    throw OutOfWorkspaceError("query (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                              ") outside workspace");
  }
  auto [t0, t1] = field.time_span();
  if (t < t0 || t > t1) {
    throw std::out_of_range("query time " + std::to_string(t) + " outside field span");
  }
  Vec2 v = field.velocity(p, t);
  if (!v.finite()) {
    throw std::runtime_error("non-finite velocity inside workspace");
  }
  return v;
}

GridField::GridField(Vec2 origin, double spacing, int nx, int ny, std::vector<double> u,
                     std::vector<double> v)
    : FlowField(Rect{origin.x, origin.y, origin.x + spacing * (nx - 1),
                     origin.y + spacing * (ny - 1)}),
      origin_(origin),
      spacing_(spacing),
      nx_(nx),
      ny_(ny),
      u_(std::move(u)),
      v_(std::move(v)) {
  if (spacing_ <= 0.0) throw std::invalid_argument("GridField: spacing must be > 0");
  if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("GridField: need at least 2x2 nodes");
  if (u_.size() != static_cast<size_t>(nx_) * ny_ || u_.size() != v_.size()) {
    throw std::invalid_argument("GridField: component array size must equal nx*ny");
  }
}

Vec2 GridField::velocity(const Vec2& p, double) const {
  double fx = (p.x - origin_.x) / spacing_;
  double fy = (p.y - origin_.y) / spacing_;
  int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
  int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
  double ax = std::clamp(fx - ix, 0.0, 1.0);
  double ay = std::clamp(fy - iy, 0.0, 1.0);
  auto lerp = [&](const std::vector<double>& c) {
    double c00 = c[iy * nx_ + ix];
    double c10 = c[iy * nx_ + ix + 1];
    double c01 = c[(iy + 1) * nx_ + ix];
    double c11 = c[(iy + 1) * nx_ + ix + 1];
    return (1 - ax) * (1 - ay) * c00 + ax * (1 - ay) * c10 + (1 - ax) * ay * c01 +
           ax * ay * c11;
  };
  return {lerp(u_), lerp(v_)};
}

std::string GridField::to_json() const {
  nlohmann::ordered_json j;
  j["origin"] = {{"x", origin_.x}, {"y", origin_.y}};
  j["spacing"] = spacing_;
  j["nx"] = nx_;
  j["ny"] = ny_;
  j["u"] = u_;
  j["v"] = v_;
  return j.dump();
}

GridField GridField::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  return GridField({j.at("origin").at("x"), j.at("origin").at("y")}, j.at("spacing"),
                   j.at("nx"), j.at("ny"), j.at("u").get<std::vector<double>>(),
                   j.at("v").get<std::vector<double>>());
}

LangmuirField::LangmuirField(Rect ws, double along_wind_speed, double cross_amplitude,
                             double cell_wavelength, double phase, double wind_direction)
    : FlowField(ws),
      speed_(along_wind_speed),
      amplitude_(cross_amplitude),
      wavelength_(cell_wavelength),
      phase_(phase),
      along_{std::cos(wind_direction), std::sin(wind_direction)},
      across_{-std::sin(wind_direction), std::cos(wind_direction)} {
  if (wavelength_ <= 0.0) throw std::invalid_argument("LangmuirField: wavelength must be > 0");
  if (amplitude_ < 0.0) throw std::invalid_argument("LangmuirField: amplitude must be >= 0");
}

double LangmuirField::cross_coordinate(const Vec2& p) const { return p.dot(across_); }

Vec2 LangmuirField::velocity(const Vec2& p, double) const {
  double s = cross_coordinate(p);
  double vc = -amplitude_ * std::sin(2.0 * std::numbers::pi * (s - phase_) / wavelength_);
  return along_ * speed_ + across_ * vc;
}

PiecewiseConstantField::PiecewiseConstantField(
    std::vector<double> breakpoints, std::vector<std::shared_ptr<const FlowField>> fields)
    : FlowField(fields.empty() ? Rect{} : fields.front()->workspace()),
      breakpoints_(std::move(breakpoints)),
      fields_(std::move(fields)) {
  if (fields_.empty()) throw std::invalid_argument("PiecewiseConstantField: no fields");
  if (breakpoints_.size() != fields_.size() + 1) {
    throw std::invalid_argument("PiecewiseConstantField: need one breakpoint per interval edge");
  }
  for (size_t i = 1; i < breakpoints_.size(); ++i) {
    if (breakpoints_[i] <= breakpoints_[i - 1]) {
      throw std::invalid_argument("PiecewiseConstantField: breakpoints must strictly increase");
    }
  }
}

Vec2 PiecewiseConstantField::velocity(const Vec2& p, double t) const {
  // Map to the unique interval [b_i, b_{i+1}); the final edge belongs to the
  // last interval so the closed span stays queryable.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  size_t idx = static_cast<size_t>(std::distance(breakpoints_.begin(), it));
  if (idx == 0 || idx > fields_.size() + 1) {
    throw std::out_of_range("PiecewiseConstantField: time outside span");
  }
  idx = std::min(idx - 1, fields_.size() - 1);
  return fields_[idx]->velocity(p, t);
}

GyreField::GyreField(Rect ws, double peak_speed)
    : FlowField(ws),
      peak_(peak_speed),
      kx_(std::numbers::pi / ws.width()),
      ky_(std::numbers::pi / ws.height()) {}

double GyreField::stream_function(const Vec2& p) const {
  const Rect& ws = workspace();
  return peak_ / std::max(kx_, ky_) * std::sin(kx_ * (p.x - ws.xmin)) *
         std::sin(ky_ * (p.y - ws.ymin));
}

Vec2 GyreField::velocity(const Vec2& p, double) const {
  // (u, v) = (dpsi/dy, -dpsi/dx)
  const Rect& ws = workspace();
  double a = peak_ / std::max(kx_, ky_);
  double sx = std::sin(kx_ * (p.x - ws.xmin)), cx = std::cos(kx_ * (p.x - ws.xmin));
  double sy = std::sin(ky_ * (p.y - ws.ymin)), cy = std::cos(ky_ * (p.y - ws.ymin));
  return {a * ky_ * sx * cy, -a * kx_ * cx * sy};
}

RotatingField::RotatingField(std::shared_ptr<const FlowField> base, double rate_rad_per_s)
    : FlowField(base->workspace()),
      base_(std::move(base)),
      rate_(rate_rad_per_s),
      center_(base_->workspace().center()) {}

Vec2 RotatingField::velocity(const Vec2& p, double t) const {
  double th = rate_ * t;
  double c = std::cos(th), s = std::sin(th);
  Vec2 d = p - center_;
  // Rotate the query back into the base frame; clamp to keep corner queries
  // of the rotated pattern defined.
  Vec2 q{center_.x + c * d.x + s * d.y, center_.y - s * d.x + c * d.y};
  const Rect& ws = base_->workspace();
  q.x = std::clamp(q.x, ws.xmin, ws.xmax);
  q.y = std::clamp(q.y, ws.ymin, ws.ymax);
  Vec2 v = base_->velocity(q, t);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace mvmf
