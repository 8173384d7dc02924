#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mvmf/flowfield.hpp"

using namespace mvmf;

namespace {
const Rect kWs{0, 0, 390, 390};
}

TEST_CASE("uniform field returns its vector everywhere") {
  UniformField f(kWs, {0.1, 0.0});
  CHECK(velocity_at(f, {0, 0}, 0).x == doctest::Approx(0.1));
  CHECK(velocity_at(f, {389, 123}, 1e6).y == doctest::Approx(0.0));
}

TEST_CASE("out-of-workspace query throws") {
  UniformField f(kWs, {0.1, 0.0});
  CHECK_THROWS_AS(velocity_at(f, {-1, 0}, 0), OutOfWorkspaceError);
  CHECK_THROWS_AS(velocity_at(f, {0, 391}, 0), OutOfWorkspaceError);
}

TEST_CASE("grid field at a cell center averages the 4 corners") {
  // 2x2 grid, spacing 10: single cell with distinct corner vectors.
  std::vector<double> u{0.1, 0.2, 0.3, 0.4};
  std::vector<double> v{-0.1, 0.0, 0.1, 0.2};
  GridField f({0, 0}, 10.0, 2, 2, u, v);
  Vec2 got = f.velocity({5, 5}, 0);
  CHECK(got.x == doctest::Approx((0.1 + 0.2 + 0.3 + 0.4) / 4));
  CHECK(got.y == doctest::Approx((-0.1 + 0.0 + 0.1 + 0.2) / 4));
  // At a node the interpolation is exact.
  CHECK(f.velocity({10, 0}, 0).x == doctest::Approx(0.2));
}

TEST_CASE("grid field JSON round trip") {
  std::vector<double> u{0.1, 0.2, 0.3, 0.4};
  std::vector<double> v{-0.1, 0.0, 0.1, 0.2};
  GridField f({5, -3}, 2.5, 2, 2, u, v);
  GridField g = GridField::from_json(f.to_json());
  CHECK(g.origin().x == doctest::Approx(5));
  CHECK(g.spacing() == doctest::Approx(2.5));
  CHECK(g.nx() == 2);
  CHECK(g.u() == u);
  CHECK(g.v() == v);
  CHECK(g.to_json() == f.to_json());
}

TEST_CASE("langmuir cross component follows -A sin(2 pi s / lambda)") {
  // Wind along +x: the cross-wind coordinate is y.
  LangmuirField f(kWs, 0.1, 0.05, 50.0, 0.0, 0.0);
  Vec2 got = f.velocity({100, 12.5}, 0);
  CHECK(got.x == doctest::Approx(0.1));
  CHECK(got.y == doctest::Approx(-0.05));  // -A sin(pi/2)
  CHECK(f.velocity({100, 0}, 0).y == doctest::Approx(0.0));
  CHECK(f.velocity({100, 37.5}, 0).y == doctest::Approx(0.05));
}

TEST_CASE("piecewise field equals its interval field strictly inside intervals") {
  auto a = std::make_shared<UniformField>(kWs, Vec2{0.1, 0.0});
  auto b = std::make_shared<UniformField>(kWs, Vec2{0.0, 0.1});
  PiecewiseConstantField f({0, 300, 600}, {a, b});
  for (double t : {0.0, 1.0, 150.0, 299.9}) {
    CHECK(f.velocity({10, 10}, t).x == doctest::Approx(0.1));
  }
  for (double t : {300.0, 450.0, 599.0}) {
    CHECK(f.velocity({10, 10}, t).y == doctest::Approx(0.1));
  }
  CHECK(f.time_span().first == doctest::Approx(0));
  CHECK(f.time_span().second == doctest::Approx(600));
  CHECK_THROWS_AS(velocity_at(f, {10, 10}, 700.0), std::out_of_range);
}

TEST_CASE("solid-body rotation speed grows linearly with radius") {
  SolidBodyRotationField f(kWs, {195, 195}, 0.01);
  CHECK(f.velocity({245, 195}, 0).norm() == doctest::Approx(0.5));
  CHECK(f.velocity({195, 195}, 0).norm() == doctest::Approx(0.0));
  // Velocity is perpendicular to the radius.
  Vec2 r{50, 0};
  CHECK(f.velocity({245, 195}, 0).dot(r) == doctest::Approx(0.0));
}

TEST_CASE("gyre field peak speed matches the requested value") {
  GyreField f(kWs, 0.15);
  double peak = 0.0;
  for (double x = 0; x <= 390; x += 5) {
    for (double y = 0; y <= 390; y += 5) {
      peak = std::max(peak, f.velocity({x, y}, 0).norm());
    }
  }
  CHECK(peak == doctest::Approx(0.15).epsilon(0.01));
}

TEST_CASE("rotating wrapper reduces to the base field at t=0 and rotates later") {
  auto base = std::make_shared<UniformField>(kWs, Vec2{0.1, 0.0});
  double rate = 15.0 * std::numbers::pi / 180.0 / 3600.0;  // 15 deg/hour
  RotatingField f(base, rate);
  Vec2 at0 = f.velocity({100, 100}, 0.0);
  CHECK(at0.x == doctest::Approx(0.1));
  CHECK(at0.y == doctest::Approx(0.0));
  // After 6 hours the pattern has turned 90 degrees.
  Vec2 later = f.velocity({195, 195}, 6.0 * 3600.0);
  CHECK(later.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(later.y == doctest::Approx(0.1));
}
