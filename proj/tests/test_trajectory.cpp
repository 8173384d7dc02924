#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mvmf/trajectory.hpp"

using namespace mvmf;

namespace {
const Rect kWs{0, 0, 390, 390};
const Rect kBig{-1000, -1000, 1000, 1000};
}

TEST_CASE("uniform advection moves in a straight line") {
  UniformField f(kWs, {0.1, 0.0});
  Trajectory tr = integrate_trajectory(f, {0, 0}, 0, 600, 1.0);
  CHECK(tr.endpoint().x == doctest::Approx(60.0));
  CHECK(tr.endpoint().y == doctest::Approx(0.0));
  CHECK(tr.samples.size() == 601);
  CHECK_FALSE(tr.truncated);
}

TEST_CASE("solid-body rotation preserves radius and advances angle") {
  SolidBodyRotationField f(kBig, {0, 0}, 0.01);
  Trajectory tr = integrate_trajectory(f, {50, 0}, 0, 600, 1.0);
  Vec2 e = tr.endpoint();
  CHECK(e.norm() == doctest::Approx(50.0).epsilon(1e-3 / 50.0));
  double angle = std::atan2(e.y, e.x);
  if (angle < 0) angle += 2 * std::numbers::pi;
  CHECK(angle == doctest::Approx(6.0).epsilon(1e-3 / 6.0));
}

TEST_CASE("piecewise-constant advection turns at the breakpoint") {
  auto a = std::make_shared<UniformField>(kWs, Vec2{0.1, 0.0});
  auto b = std::make_shared<UniformField>(kWs, Vec2{0.0, 0.1});
  PiecewiseConstantField f({0, 300, 600}, {a, b});
  Trajectory tr = integrate_trajectory(f, {0, 0}, 0, 600, 1.0);
  // RK4 samples inside the step that straddles the breakpoint see a mix of
  // both fields, so the corner is slightly rounded; the endpoint is exact to
  // well under a step's displacement.
  CHECK(tr.endpoint().x == doctest::Approx(30.0).epsilon(0.05 / 30.0));
  CHECK(tr.endpoint().y == doctest::Approx(30.0).epsilon(0.05 / 30.0));
}

TEST_CASE("integration truncates and flags on workspace exit") {
  UniformField f(kWs, {1.0, 0.0});
  Trajectory tr = integrate_trajectory(f, {380, 100}, 0, 600, 1.0);
  CHECK(tr.truncated);
  CHECK(tr.duration() < 600);
  CHECK(tr.endpoint().x <= 390.0);
}

TEST_CASE("integration from outside the workspace is an error") {
  UniformField f(kWs, {1.0, 0.0});
  CHECK_THROWS_AS(integrate_trajectory(f, {400, 100}, 0, 600, 1.0), OutOfWorkspaceError);
}

TEST_CASE("RK4 endpoint error shrinks at least 8x when dt halves") {
  SolidBodyRotationField f(kBig, {0, 0}, 0.01);
  Vec2 exact{50 * std::cos(6.0), 50 * std::sin(6.0)};
  auto err = [&](double dt) {
    return distance(integrate_trajectory(f, {50, 0}, 0, 600, dt).endpoint(), exact);
  };
  double e8 = err(8.0), e4 = err(4.0);
  CHECK(e8 / e4 >= 8.0);
}

TEST_CASE("trajectory samples respect the field speed bound") {
  GyreField f(kWs, 0.2);
  Trajectory tr = integrate_trajectory(f, {100, 80}, 0, 600, 1.0);
  for (size_t i = 1; i < tr.samples.size(); ++i) {
    double d = distance(tr.samples[i].p, tr.samples[i - 1].p);
    CHECK(d <= (0.2 + 1e-6) * tr.dt);
  }
}

TEST_CASE("divergence of a uniform field is exactly zero") {
  UniformField f(kWs, {0.1, 0.05});
  CHECK(divergence_at(f, {100, 100}, 0) == 0.0);
}

TEST_CASE("langmuir divergence extremes are +-2 pi A / lambda") {
  const double A = 0.05, lam = 50.0;
  LangmuirField f(kWs, 0.1, A, lam, 0.0, 0.0);
  const double dmax = 2 * std::numbers::pi * A / lam;
  // Convergence line at s = 0 (div minimum), divergence max half a cell away.
  CHECK(divergence_at(f, {100, 0 + lam / 2}, 0) == doctest::Approx(dmax).epsilon(0.01));
  CHECK(divergence_at(f, {100, 50}, 0) == doctest::Approx(-dmax).epsilon(0.01));
  CHECK(divergence_at(f, {100, 100 + lam / 2}, 0) == doctest::Approx(dmax).epsilon(0.01));
}

TEST_CASE("solid-body rotation is divergence-free") {
  SolidBodyRotationField f(kWs, {195, 195}, 0.01);
  CHECK(std::abs(divergence_at(f, {100, 150}, 0)) < 1e-9);
}

TEST_CASE("divergence stencil must stay inside the workspace") {
  UniformField f(kWs, {0.1, 0.0});
  CHECK_THROWS_AS(divergence_at(f, {0.5, 100}, 0, 1.0), OutOfWorkspaceError);
}

TEST_CASE("incompressibility report: uniform field is clean") {
  UniformField f(kWs, {0.1, 0.0});
  auto rep = incompressibility_report(f, kWs.shrunk(5), 20.0, 1e-6);
  CHECK(rep.violations.empty());
  CHECK(rep.samples > 0);
}

TEST_CASE("incompressibility report flags the langmuir field") {
  const double A = 0.05, lam = 50.0;
  LangmuirField f(kWs, 0.1, A, lam, 0.0, 0.0);
  auto rep = incompressibility_report(f, kWs.shrunk(5), 2.0, 1e-4);
  CHECK_FALSE(rep.violations.empty());
  CHECK(rep.max_abs_divergence ==
        doctest::Approx(2 * std::numbers::pi * A / lam).epsilon(0.1));
}

TEST_CASE("incompressibility report: stream-function gyre is clean at 1e-6") {
  GyreField f(kWs, 0.2);
  auto rep = incompressibility_report(f, kWs.shrunk(5), 20.0, 1e-6);
  CHECK(rep.violations.empty());
}

TEST_CASE("stream-function fields are divergence-free at 100 random points") {
  GyreField f(kWs, 0.2);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(5.0, 385.0);
  for (int i = 0; i < 100; ++i) {
    Vec2 p{u(rng), u(rng)};
    CHECK(std::abs(divergence_at(f, p, 0)) < 1e-6);
  }
}

TEST_CASE("trajectory interpolation and polyline distance") {
  UniformField f(kWs, {0.1, 0.0});
  Trajectory tr = integrate_trajectory(f, {0, 100}, 0, 600, 1.0);
  Vec2 mid = tr.position_at(300.5);
  CHECK(mid.x == doctest::Approx(30.05));
  CHECK(tr.distance_to({30, 110}) == doctest::Approx(10.0));
}
