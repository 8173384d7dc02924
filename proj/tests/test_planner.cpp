#include <doctest.h>

#include <cmath>
#include <random>

#include "mvmf/planner.hpp"

using namespace mvmf;

namespace {

const Rect kWs{0, 0, 390, 390};

CandidateAction make_action(int id, Vec2 drop, Vec2 pick, double T,
                            std::vector<int> covered = {}) {
  CandidateAction a;
  a.id = id;
  a.drop_pos = drop;
  a.pick_pos = pick;
  a.drift_s = T;
  a.covered = std::move(covered);
  int steps = std::max(1, static_cast<int>(T));
  for (int i = 0; i <= steps; ++i) {
    double w = static_cast<double>(i) / steps;
    a.drift.samples.push_back({T * w, drop + (pick - drop) * w});
  }
  a.drift.dt = T / steps;
  return a;
}

CandidateAction cover_only(int id, std::vector<int> covered) {
  return make_action(id, {100.0 + 10.0 * id, 100}, {110.0 + 10.0 * id, 100}, 60,
                     std::move(covered));
}

}  // namespace

TEST_CASE("sampled action in a uniform field drifts (60, 0)") {
  UniformField f(kWs, {0.1, 0.0});
  auto actions = sample_actions(f, kWs, 1, 600, {}, 5);
  REQUIRE(actions.size() == 1);
  if (!actions[0].exits_workspace) {
    Vec2 expect = actions[0].drop_pos + Vec2{60, 0};
    CHECK(distance(actions[0].pick_pos, expect) < 1e-6);
    CHECK(actions[0].drift_s == doctest::Approx(600));
  }
}

TEST_CASE("POI on the drift path is covered") {
  UniformField f(kWs, {0.1, 0.0});
  auto actions = sample_actions(f, kWs, 20, 600, {}, 5);
  // Plant a POI exactly at some non-truncated action's midpoint.
  const CandidateAction* a = nullptr;
  for (const auto& c : actions) {
    if (!c.exits_workspace) a = &c;
  }
  REQUIRE(a != nullptr);
  Vec2 mid = a->drift.position_at(300.0);
  std::vector<Poi> pois{{"q0", mid, 10.0}, {"q1", mid + Vec2{0, 200}, 10.0}};
  auto again = sample_actions(f, kWs, 20, 600, pois, 5);
  bool covered = false;
  for (int q : again[a - actions.data()].covered) {
    if (q == 0) covered = true;
  }
  CHECK(covered);
}

TEST_CASE("action sampling is deterministic in the seed") {
  GyreField f(kWs, 0.15);
  auto a = sample_actions(f, kWs, 30, 600, {}, 42);
  auto b = sample_actions(f, kWs, 30, 600, {}, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].drop_pos.x == b[i].drop_pos.x);
    CHECK(a[i].pick_pos.y == b[i].pick_pos.y);
  }
  auto c = sample_actions(f, kWs, 30, 600, {}, 43);
  CHECK(a[0].drop_pos.x != c[0].drop_pos.x);
}

TEST_CASE("selection dominance: the 2-POI action beats the 1-POI action") {
  std::vector<CandidateAction> actions{cover_only(0, {0, 1}), cover_only(1, {0})};
  std::vector<Poi> pois{{"q0", {0, 0}, 10}, {"q1", {50, 0}, 10}};
  PlannerConfig cfg;
  auto sel = select_actions_mcts(actions, pois, 1, cfg);
  REQUIRE(sel.size() == 1);
  CHECK(sel[0] == 0);
}

TEST_CASE("disjoint coverage selects everything within budget") {
  std::vector<CandidateAction> actions{cover_only(0, {0}), cover_only(1, {1}),
                                       cover_only(2, {2})};
  std::vector<Poi> pois{{"q0", {0, 0}, 10}, {"q1", {50, 0}, 10}, {"q2", {100, 0}, 10}};
  PlannerConfig cfg;
  auto sel = select_actions_mcts(actions, pois, 3, cfg);
  CHECK(sel.size() == 3);
  CHECK(coverage_of(actions, sel) == 3);
}

TEST_CASE("MCTS selection matches or beats greedy set cover on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> npois(0, 5);
  std::uniform_int_distribution<int> which(0, 5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CandidateAction> actions;
    for (int i = 0; i < 12; ++i) {
      std::vector<int> cov;
      int k = npois(rng);
      for (int j = 0; j < k; ++j) cov.push_back(which(rng));
      std::sort(cov.begin(), cov.end());
      cov.erase(std::unique(cov.begin(), cov.end()), cov.end());
      actions.push_back(cover_only(i, std::move(cov)));
    }
    std::vector<Poi> pois(6, Poi{"q", {0, 0}, 10});
    PlannerConfig cfg;
    cfg.seed = 1000 + trial;
    auto sel = select_actions_mcts(actions, pois, 4, cfg);
    auto greedy = greedy_set_cover(actions, pois, 4);
    CHECK(coverage_of(actions, sel) >= coverage_of(actions, greedy));
  }
}

TEST_CASE("selection coverage does not regress with more iterations") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> npois(0, 4);
  std::uniform_int_distribution<int> which(0, 7);
  int ok = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::vector<CandidateAction> actions;
    for (int i = 0; i < 15; ++i) {
      std::vector<int> cov;
      int k = npois(rng);
      for (int j = 0; j < k; ++j) cov.push_back(which(rng));
      std::sort(cov.begin(), cov.end());
      cov.erase(std::unique(cov.begin(), cov.end()), cov.end());
      actions.push_back(cover_only(i, std::move(cov)));
    }
    std::vector<Poi> pois(8, Poi{"q", {0, 0}, 10});
    PlannerConfig lo, hi;
    lo.mcts_iterations = 50;
    hi.mcts_iterations = 5000;
    lo.seed = hi.seed = 500 + seed;
    int c_lo = coverage_of(actions, select_actions_mcts(actions, pois, 4, lo));
    int c_hi = coverage_of(actions, select_actions_mcts(actions, pois, 4, hi));
    if (c_hi >= c_lo) ++ok;
  }
  CHECK(ok >= 18);  // >= 90% of seeds
}

TEST_CASE("single action schedule: drop at 50 s, pick at 650 s") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 1}};
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 600)};
  PlannerConfig cfg;
  Schedule s = schedule_decmcts(vessels, actions, cfg);
  REQUIRE(s.by_vessel.size() == 1);
  REQUIRE(s.by_vessel[0].size() == 2);
  CHECK(s.by_vessel[0][0].time_s == doctest::Approx(50.0));
  CHECK(s.by_vessel[0][1].time_s == doctest::Approx(650.0));
  CHECK(s.makespan() == doctest::Approx(650.0));
  validate_schedule(s, vessels, actions);

  Schedule oracle = exhaustive_schedule(vessels, actions);
  CHECK(oracle.makespan() == doctest::Approx(650.0));
}

TEST_CASE("unattended time is penalized in the cost model") {
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 600)};
  Schedule on_time;
  on_time.by_vessel = {{{0, EventKind::kDrop, 50, {100, 0}}, {0, EventKind::kPick, 650, {160, 0}}}};
  on_time.float_of_action = {0};
  Schedule late = on_time;
  late.by_vessel[0][1].time_s = 950;  // float adrift 300 s past its pick time
  double w = 0.5;
  double cost_on = on_time.makespan() + w * on_time.total_unattended(actions);
  double cost_late = late.makespan() + w * late.total_unattended(actions);
  CHECK(on_time.total_unattended(actions) == doctest::Approx(0.0));
  CHECK(late.total_unattended(actions) == doctest::Approx(300.0));
  CHECK(cost_late > cost_on);
}

TEST_CASE("symmetric two-action tie resolves lexicographically") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 2}};
  std::vector<CandidateAction> actions{make_action(0, {100, 100}, {160, 100}, 600),
                                       make_action(1, {100, -100}, {160, -100}, 600)};
  Schedule s = exhaustive_schedule(vessels, actions);
  validate_schedule(s, vessels, actions);
  // Both orderings have equal makespan; the flattened event list starting with
  // action 0's drop is lexicographically first.
  CHECK(s.by_vessel[0][0].action_id == 0);
  CHECK(s.by_vessel[0][0].kind == EventKind::kDrop);
}

TEST_CASE("exhaustive schedule beats 100 random feasible schedules") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 2}, {"v1", {390, 0}, 1.5, 1}};
  std::vector<CandidateAction> actions{make_action(0, {100, 50}, {150, 60}, 400),
                                       make_action(1, {250, 150}, {230, 120}, 500),
                                       make_action(2, {300, 40}, {330, 80}, 300)};
  Schedule best = exhaustive_schedule(vessels, actions);
  validate_schedule(best, vessels, actions);

  std::mt19937_64 rng(123);
  int tried = 0;
  while (tried < 100) {
    // Random assignment of actions to vessels, random interleaving.
    std::vector<std::vector<int>> seq(2);
    for (int a = 0; a < 3; ++a) {
      int v = static_cast<int>(rng() % 2);
      seq[v].push_back(2 * a);
      seq[v].push_back(2 * a + 1);
    }
    for (auto& s : seq) std::shuffle(s.begin(), s.end(), rng);
    auto timed = timed_schedule(vessels, actions, seq);
    if (!timed) continue;
    // Only count fully valid random schedules.
    try {
      validate_schedule(*timed, vessels, actions);
    } catch (const std::logic_error&) {
      continue;
    }
    ++tried;
    CHECK(best.makespan() <= timed->makespan() + 1e-9);
  }
}

TEST_CASE("single-vessel small instances: decmcts is exactly optimal") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(50.0, 340.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Vessel> vessels{{"v0", {10, 10}, 2.0, 2}};
    std::vector<CandidateAction> actions;
    for (int i = 0; i < 2; ++i) {
      Vec2 d{u(rng), u(rng)};
      actions.push_back(make_action(i, d, d + Vec2{40, 10}, 300 + 100 * i));
    }
    PlannerConfig cfg;
    cfg.seed = 77 + trial;
    cfg.unattended_weight = 0.0;  // compare pure makespan against the oracle
    Schedule dec = schedule_decmcts(vessels, actions, cfg);
    Schedule opt = exhaustive_schedule(vessels, actions);
    validate_schedule(dec, vessels, actions);
    CHECK(dec.makespan() == doctest::Approx(opt.makespan()).epsilon(1e-9));
  }
}

TEST_CASE("two-vessel instance lands within 5% of the exhaustive optimum") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 2}, {"v1", {390, 390}, 2.0, 2}};
  std::vector<CandidateAction> actions{make_action(0, {80, 60}, {120, 80}, 500),
                                       make_action(1, {300, 320}, {280, 300}, 400),
                                       make_action(2, {200, 100}, {240, 140}, 450),
                                       make_action(3, {150, 300}, {180, 330}, 350)};
  PlannerConfig cfg;
  cfg.seed = 9;
  cfg.unattended_weight = 0.0;
  Schedule dec = schedule_decmcts(vessels, actions, cfg);
  Schedule opt = exhaustive_schedule(vessels, actions);
  validate_schedule(dec, vessels, actions);
  CHECK(dec.makespan() <= 1.05 * opt.makespan());
}

TEST_CASE("timed_schedule rejects capacity violations with a reason") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 1}};
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 600),
                                       make_action(1, {100, 50}, {160, 50}, 600)};
  std::string reason;
  // Two drops before any pick needs capacity 2.
  auto s = timed_schedule(vessels, actions, {{0, 2, 1, 3}}, &reason);
  CHECK_FALSE(s.has_value());
  CHECK_FALSE(reason.empty());
}

TEST_CASE("makespan arithmetic") {
  Schedule empty;
  CHECK(empty.makespan() == 0.0);
  Schedule one;
  one.by_vessel = {{{0, EventKind::kPick, 650, {0, 0}}}};
  CHECK(makespan(one) == doctest::Approx(650));
  Schedule two;
  two.by_vessel = {{{0, EventKind::kPick, 650, {0, 0}}}, {{1, EventKind::kPick, 700, {0, 0}}}};
  CHECK(makespan(two) == doctest::Approx(700));
}

TEST_CASE("transit scaling: doubling distances and speed keeps times") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 1}};
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 20)};
  // Drift short enough that the vessel never waits: transit dominates.
  Schedule a = exhaustive_schedule(vessels, actions);
  std::vector<Vessel> vessels2{{"v0", {0, 0}, 4.0, 1}};
  std::vector<CandidateAction> actions2{make_action(0, {200, 0}, {320, 0}, 20)};
  Schedule b = exhaustive_schedule(vessels2, actions2);
  CHECK(a.by_vessel[0][0].time_s == doctest::Approx(b.by_vessel[0][0].time_s));
  CHECK(a.makespan() == doctest::Approx(b.makespan()));
}

TEST_CASE("wake-safe transit planning leaves clear paths untouched") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 1}};
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 600)};
  Schedule s = exhaustive_schedule(vessels, actions);
  Rect big{-50, -200, 500, 200};
  // The only float path is the vessel's own action; own-action legs are exempt.
  TransitPlan plan = plan_wake_safe_transits(s, vessels, actions, 15.0, big);
  for (const auto& leg : plan.legs) {
    CHECK_FALSE(leg.rerouted);
    CHECK(leg.waypoints.size() == 2);
  }
  CHECK(plan.max_induced_delay_s == 0.0);
}

TEST_CASE("d_wake = 0 always yields straight paths") {
  std::vector<Vessel> vessels{{"v0", {0, 0}, 2.0, 2}};
  std::vector<CandidateAction> actions{make_action(0, {100, 0}, {160, 0}, 600),
                                       make_action(1, {130, -50}, {130, 50}, 300)};
  Schedule s = exhaustive_schedule(vessels, actions);
  Rect big{-50, -200, 500, 200};
  TransitPlan plan = plan_wake_safe_transits(s, vessels, actions, 0.0, big);
  for (const auto& leg : plan.legs) CHECK_FALSE(leg.rerouted);
}
