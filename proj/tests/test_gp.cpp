#include <doctest.h>

#include <cmath>
#include <random>

#include "mvmf/gp.hpp"
#include "mvmf/trajectory.hpp"

using namespace mvmf;

namespace {

const Rect kWs{0, 0, 390, 390};

// Velocity measurements sampled directly from a field on a jittered grid.
std::vector<Measurement> sample_field(const FlowField& f, int n_side, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jit(-5.0, 5.0);
  std::vector<Measurement> out;
  double step = 380.0 / (n_side - 1);
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      Vec2 p{5 + i * step + jit(rng), 5 + j * step + jit(rng)};
      out.push_back({p, f.velocity(p, 0), 0.0, 0.01});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("posterior interpolates a single low-noise measurement") {
  Hyperparams hp{100.0, 0.1, 1e-6};
  auto field = fit_divergence_free_gp(kWs, {{{0, 0}, {0.1, 0.0}, 0.0, 1e-6}}, hp);
  Vec2 got = field.velocity({0, 0}, 0);
  CHECK(std::abs(got.x - 0.1) < 1e-4);
  CHECK(std::abs(got.y) < 1e-4);
}

TEST_CASE("fit recovers a gyre to well under the field RMS speed") {
  GyreField truth(kWs, 0.15);
  auto meas = sample_field(truth, 8, 3);
  Hyperparams hp{100.0, 0.1, 0.01};
  auto field = fit_divergence_free_gp(kWs, meas, hp);

  double err_sq = 0.0, speed_sq = 0.0;
  int n = 0;
  for (double x = 20; x <= 370; x += 25) {
    for (double y = 20; y <= 370; y += 25) {
      Vec2 t = truth.velocity({x, y}, 0);
      Vec2 e = field.velocity({x, y}, 0);
      err_sq += (t - e).dot(t - e);
      speed_sq += t.dot(t);
      ++n;
    }
  }
  CHECK(std::sqrt(err_sq / n) < 0.5 * std::sqrt(speed_sq / n));
}

TEST_CASE("fitted field is divergence-free at 100 random interior points") {
  GyreField truth(kWs, 0.15);
  auto field = fit_divergence_free_gp(kWs, sample_field(truth, 5, 7), {50.0, 0.1, 0.01});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(2.0, 388.0);
  for (int i = 0; i < 100; ++i) {
    Vec2 p{u(rng), u(rng)};
    CHECK(std::abs(divergence_at(field, p, 0, 0.5)) < 1e-6);
  }
}

TEST_CASE("covariance shrinks at training points and rebounds far away") {
  Hyperparams hp{25.0, 0.1, 0.01};
  std::vector<Measurement> meas{{{100, 100}, {0.1, 0.0}, 0.0, 0.01},
                                {{120, 100}, {0.1, 0.0}, 0.0, 0.01}};
  auto field = fit_divergence_free_gp(kWs, meas, hp);
  double near = field.covariance_trace({100, 100});
  double far = field.covariance_trace({300, 300});  // > 3 length scales away
  CHECK(near < far);
  // Far from all data the posterior reverts to the prior, trace 2 sf^2.
  CHECK(far == doctest::Approx(2 * 0.1 * 0.1).epsilon(0.01));
}

TEST_CASE("posterior mean at a training input approaches the data as noise vanishes") {
  GyreField truth(kWs, 0.15);
  auto meas = sample_field(truth, 4, 9);
  Vec2 target = meas.front().v;
  double prev = 1e9;
  for (double sn : {0.05, 0.005, 0.0005}) {
    auto field = fit_divergence_free_gp(kWs, meas, {80.0, 0.1, sn});
    double err = distance(field.velocity(meas.front().p, 0), target);
    CHECK(err < prev + 1e-12);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("adding a measurement never increases posterior covariance") {
  GyreField truth(kWs, 0.15);
  auto meas = sample_field(truth, 4, 13);
  auto before = fit_divergence_free_gp(kWs, meas, {80.0, 0.1, 0.01});
  meas.push_back({{200, 210}, truth.velocity({200, 210}, 0), 0.0, 0.01});
  auto after = fit_divergence_free_gp(kWs, meas, {80.0, 0.1, 0.01});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(5.0, 385.0);
  for (int i = 0; i < 10; ++i) {
    Vec2 p{u(rng), u(rng)};
    CHECK(after.covariance_trace(p) <= before.covariance_trace(p) + 1e-9);
  }
}

TEST_CASE("hyperparameters must be strictly positive") {
  CHECK_THROWS_AS(fit_divergence_free_gp(kWs, {{{0, 0}, {0.1, 0.0}, 0.0, 0.01}},
                                         Hyperparams{0.0, 0.1, 0.01}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_divergence_free_gp(kWs, {}, Hyperparams{100.0, 0.1, 0.01}),
                  std::invalid_argument);
}

TEST_CASE("absurd length scale makes the kernel matrix singular") {
  GyreField truth(kWs, 0.15);
  auto meas = sample_field(truth, 6, 21);
  CHECK_THROWS_AS(fit_divergence_free_gp(kWs, meas, {1e9, 0.1, 1e-9}), SingularKernelError);
}
