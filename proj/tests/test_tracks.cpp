#include <doctest.h>

#include <cmath>
#include <random>

#include "mvmf/tracks.hpp"

using namespace mvmf;

namespace {

DrifterTrack line_track(double vx, double vy, double duration, double dt = 1.0,
                        double noise = 0.0, uint64_t seed = 0) {
  DrifterTrack tr;
  tr.id = "d0";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  for (double t = 0; t <= duration + 1e-9; t += dt) {
    RawFix f;
    f.t = t;
    f.p = {vx * t, vy * t};
    if (noise > 0) f.p = f.p + Vec2{n(rng), n(rng)};
    tr.fixes.push_back(f);
  }
  return tr;
}

}  // namespace

TEST_CASE("smoother is exact on noiseless straight-line fixes") {
  DrifterTrack tr = line_track(0.1, 0.05, 600);
  DrifterTrack out = kalman_smooth(tr, 0.005, 3.0);
  REQUIRE(out.fixes.size() == tr.fixes.size());
  for (size_t i = 0; i < tr.fixes.size(); ++i) {
    CHECK(distance(out.fixes[i].p, tr.fixes[i].p) < 1e-9);
    CHECK(out.fixes[i].t == tr.fixes[i].t);
  }
}

TEST_CASE("smoothing reduces RMS error on noisy straight lines") {
  // 100 noisy tracks against the shared noiseless truth.
  double raw_sq = 0.0, smooth_sq = 0.0;
  size_t count = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    DrifterTrack noisy = line_track(0.1, 0.0, 600, 1.0, 3.0, seed);
    DrifterTrack out = kalman_smooth(noisy, 0.005, 3.0);
    for (size_t i = 0; i < noisy.fixes.size(); ++i) {
      Vec2 truth{0.1 * noisy.fixes[i].t, 0.0};
      raw_sq += (noisy.fixes[i].p - truth).dot(noisy.fixes[i].p - truth);
      smooth_sq += (out.fixes[i].p - truth).dot(out.fixes[i].p - truth);
      ++count;
    }
  }
  double raw_rms = std::sqrt(raw_sq / count), smooth_rms = std::sqrt(smooth_sq / count);
  CHECK(smooth_rms < raw_rms);
}

TEST_CASE("comm gap is bridged and flagged interpolated") {
  DrifterTrack tr = line_track(0.1, 0.0, 600);
  for (auto& f : tr.fixes) {
    if (f.t >= 200 && f.t < 260) f.received = false;
  }
  DrifterTrack out = kalman_smooth(tr, 0.005, 3.0);
  REQUIRE(out.fixes.size() == tr.fixes.size());
  for (size_t i = 0; i < out.fixes.size(); ++i) {
    CHECK(out.fixes[i].t == tr.fixes[i].t);
    bool in_gap = tr.fixes[i].t >= 200 && tr.fixes[i].t < 260;
    CHECK(out.fixes[i].interpolated == in_gap);
  }
}

TEST_CASE("smoother needs two received fixes") {
  DrifterTrack tr = line_track(0.1, 0.0, 600);
  for (size_t i = 1; i < tr.fixes.size(); ++i) tr.fixes[i].received = false;
  CHECK_THROWS_AS(kalman_smooth(tr, 0.005, 3.0), std::invalid_argument);
}

TEST_CASE("measurement velocities recover a constant-velocity track") {
  DrifterTrack tr = line_track(0.1, 0.0, 600);
  auto meas = track_to_measurements(tr, 30.0);
  CHECK_FALSE(meas.empty());
  for (const auto& m : meas) {
    CHECK(std::abs(m.v.x - 0.1) < 1e-9);
    CHECK(std::abs(m.v.y) < 1e-9);
  }
}

TEST_CASE("measurement count respects the subsample interval") {
  DrifterTrack tr = line_track(0.1, 0.0, 600);
  auto meas = track_to_measurements(tr, 60.0);
  CHECK(meas.size() <= 10);
  CHECK(meas.size() >= 8);
}

TEST_CASE("no measurement window spans a comm gap") {
  DrifterTrack tr = line_track(0.1, 0.0, 600);
  for (auto& f : tr.fixes) {
    if (f.t >= 200 && f.t <= 300) f.received = false;
  }
  auto meas = track_to_measurements(tr, 30.0);
  CHECK_FALSE(meas.empty());
  for (const auto& m : meas) {
    // Central differences span +-30 s around the measurement time.
    bool overlaps = m.t + 30.0 >= 200.0 && m.t - 30.0 <= 300.0;
    CHECK_FALSE(overlaps);
  }
}

TEST_CASE("tracks CSV round trip") {
  DrifterTrack a = line_track(0.1, 0.0, 10);
  a.fixes[3].received = false;
  DrifterTrack b = line_track(0.0, 0.2, 10);
  b.id = "d1";
  auto back = tracks_from_csv(tracks_to_csv({a, b}));
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "d0");
  CHECK(back[1].id == "d1");
  REQUIRE(back[0].fixes.size() == a.fixes.size());
  CHECK_FALSE(back[0].fixes[3].received);
  for (size_t i = 0; i < a.fixes.size(); ++i) {
    CHECK(distance(back[0].fixes[i].p, a.fixes[i].p) < 1e-6);
  }
}
