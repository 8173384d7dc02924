#include "mvmf/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace mvmf {

size_t DrifterTrack::received_count() const {
  return static_cast<size_t>(
      std::count_if(fixes.begin(), fixes.end(), [](const RawFix& f) { return f.received; }));
}

namespace {

void check_monotone(const DrifterTrack& track) {
  for (size_t i = 1; i < track.fixes.size(); ++i) {
    if (track.fixes[i].t <= track.fixes[i - 1].t) {
      throw std::invalid_argument("track " + track.id + ": fix times must strictly increase");
    }
  }
}

}  // namespace

DrifterTrack kalman_smooth(const DrifterTrack& track, double process_noise_accel,
                           double meas_noise_m) {
  check_monotone(track);
  if (track.received_count() < 2) {
    throw std::invalid_argument("kalman_smooth: need at least 2 received fixes");
  }

  using Mat4 = Eigen::Matrix4d;
  using Vec4 = Eigen::Vector4d;
  const size_t n = track.fixes.size();
  const double q = process_noise_accel * process_noise_accel;  // accel PSD
  const double r = meas_noise_m * meas_noise_m;

  // State [x vx y vy].
  Eigen::Matrix<double, 2, 4> H;
  H << 1, 0, 0, 0, 0, 0, 1, 0;

  std::vector<Vec4> x_pred(n), x_filt(n);
  std::vector<Mat4> P_pred(n), P_filt(n);

  // Initialize from the first two received fixes so a model-consistent track
  // produces zero innovations from the start.
  size_t i0 = 0;
  while (!track.fixes[i0].received) ++i0;
  size_t i1 = i0 + 1;
  while (!track.fixes[i1].received) ++i1;
  const RawFix& f0 = track.fixes[i0];
  const RawFix& f1 = track.fixes[i1];
  double dt01 = f1.t - f0.t;
  Vec4 x0;
  x0 << f0.p.x, (f1.p.x - f0.p.x) / dt01, f0.p.y, (f1.p.y - f0.p.y) / dt01;
  Mat4 P0 = Mat4::Zero();
  P0(0, 0) = P0(2, 2) = r;
  P0(1, 1) = P0(3, 3) = 2.0 * r / (dt01 * dt01) + 0.01;

  auto transition = [&](double dt, Mat4& F, Mat4& Q) {
    F = Mat4::Identity();
    F(0, 1) = dt;
    F(2, 3) = dt;
    double d3 = dt * dt * dt / 3.0, d2 = dt * dt / 2.0;
    Q = Mat4::Zero();
    Q(0, 0) = Q(2, 2) = q * d3;
    Q(0, 1) = Q(1, 0) = Q(2, 3) = Q(3, 2) = q * d2;
    Q(1, 1) = Q(3, 3) = q * dt;
  };

  Vec4 x = x0;
  Mat4 P = P0;
  for (size_t k = 0; k < n; ++k) {
    if (k == 0) {
      x_pred[k] = x;
      P_pred[k] = P;
    } else {
      double dt = track.fixes[k].t - track.fixes[k - 1].t;
      Mat4 F, Q;
      transition(dt, F, Q);
      x_pred[k] = F * x_filt[k - 1];
      P_pred[k] = F * P_filt[k - 1] * F.transpose() + Q;
    }
    if (track.fixes[k].received) {
      Eigen::Vector2d z(track.fixes[k].p.x, track.fixes[k].p.y);
      Eigen::Matrix2d S = H * P_pred[k] * H.transpose() + r * Eigen::Matrix2d::Identity();
      Eigen::Matrix<double, 4, 2> K = P_pred[k] * H.transpose() * S.inverse();
      x_filt[k] = x_pred[k] + K * (z - H * x_pred[k]);
      P_filt[k] = (Mat4::Identity() - K * H) * P_pred[k];
    } else {
      x_filt[k] = x_pred[k];
      P_filt[k] = P_pred[k];
    }
    x = x_filt[k];
    P = P_filt[k];
  }

  // RTS backward pass.
  std::vector<Vec4> x_smooth(n);
  x_smooth[n - 1] = x_filt[n - 1];
  Mat4 P_s = P_filt[n - 1];
  for (size_t k = n - 1; k-- > 0;) {
    double dt = track.fixes[k + 1].t - track.fixes[k].t;
    Mat4 F, Q;
    transition(dt, F, Q);
    Mat4 C = P_filt[k] * F.transpose() * P_pred[k + 1].inverse();
    x_smooth[k] = x_filt[k] + C * (x_smooth[k + 1] - x_pred[k + 1]);
    P_s = P_filt[k] + C * (P_s - P_pred[k + 1]) * C.transpose();
  }

  DrifterTrack out;
  out.id = track.id;
  out.fixes.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    RawFix f = track.fixes[k];
    f.p = {x_smooth[k](0), x_smooth[k](2)};
    f.interpolated = !track.fixes[k].received;
    out.fixes.push_back(f);
  }
  return out;
}

std::vector<Measurement> track_to_measurements(const DrifterTrack& track,
                                               double subsample_interval_s) {
  check_monotone(track);
  if (track.fixes.size() < 2) throw std::invalid_argument("track too short");
  double native = track.fixes[1].t - track.fixes[0].t;
  if (subsample_interval_s < native - 1e-9) {
    throw std::invalid_argument("subsample interval below native fix interval");
  }
  if (track.duration() < subsample_interval_s) {
    throw std::invalid_argument("track shorter than one subsample interval");
  }

  // Indices of fixes nearest each subsample time.
  std::vector<size_t> idx;
  double t0 = track.fixes.front().t;
  size_t j = 0;
  for (double ts = t0; ts <= track.fixes.back().t + 1e-9; ts += subsample_interval_s) {
    while (j + 1 < track.fixes.size() &&
           std::abs(track.fixes[j + 1].t - ts) <= std::abs(track.fixes[j].t - ts)) {
      ++j;
    }
    if (idx.empty() || idx.back() != j) idx.push_back(j);
  }

  auto window_clean = [&](size_t a, size_t b) {
    for (size_t k = a; k <= b; ++k) {
      if (!track.fixes[k].received || track.fixes[k].interpolated) return false;
    }
    return true;
  };

  std::vector<Measurement> out;
  for (size_t k = 1; k + 1 < idx.size(); ++k) {
    size_t ia = idx[k - 1], ib = idx[k], ic = idx[k + 1];
    if (!window_clean(ia, ic)) continue;
    const RawFix& fa = track.fixes[ia];
    const RawFix& fb = track.fixes[ib];
    const RawFix& fc = track.fixes[ic];
    double span = fc.t - fa.t;
    Measurement m;
    m.p = fb.p;
    m.t = fb.t;
    m.v = (fc.p - fa.p) * (1.0 / span);
    m.velocity_noise_std = std::sqrt(2.0) * fb.position_noise_std / span;
    out.push_back(m);
  }
  return out;
}

std::vector<DrifterTrack> tracks_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, DrifterTrack> by_id;
  std::vector<std::string> order;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.rfind("drifter_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ls(line);
    std::string id, ts, xs, ys, rs;
    if (!std::getline(ls, id, ',') || !std::getline(ls, ts, ',') ||
        !std::getline(ls, xs, ',') || !std::getline(ls, ys, ',') || !std::getline(ls, rs)) {
      throw std::invalid_argument("malformed track CSV line: " + line);
    }
    RawFix f;
    f.t = std::stod(ts);
    f.p = {std::stod(xs), std::stod(ys)};
    f.received = std::stoi(rs) != 0;
    if (!by_id.count(id)) {
      by_id[id].id = id;
      order.push_back(id);
    }
    by_id[id].fixes.push_back(f);
  }
  std::vector<DrifterTrack> out;
  for (const auto& id : order) out.push_back(by_id[id]);
  for (const auto& t : out) check_monotone(t);
  return out;
}

std::string tracks_to_csv(const std::vector<DrifterTrack>& tracks) {
  std::ostringstream out;
  out << "drifter_id,time_s,x_m,y_m,received\n";
  out.precision(10);
  for (const auto& t : tracks) {
    for (const auto& f : t.fixes) {
      out << t.id << ',' << f.t << ',' << f.p.x << ',' << f.p.y << ',' << (f.received ? 1 : 0)
          << '\n';
    }
  }
  return out.str();
}

}  // namespace mvmf
