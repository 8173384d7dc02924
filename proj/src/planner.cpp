#include "mvmf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <random>

#include "mvmf/geometry.hpp"
#include "mvmf/wake.hpp"

namespace mvmf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

int action_of(int event) { return event / 2; }
bool is_pick(int event) { return event % 2 == 1; }
}  // namespace

double Schedule::makespan() const {
  double m = 0.0;
  for (const auto& seq : by_vessel) {
    for (const auto& e : seq) m = std::max(m, e.time_s);
  }
  return m;
}

double makespan(const Schedule& s) { return s.makespan(); }

double Schedule::total_unattended(const std::vector<CandidateAction>& actions) const {
  std::map<int, double> drop_time, pick_time;
  for (const auto& seq : by_vessel) {
    for (const auto& e : seq) {
      (e.kind == EventKind::kDrop ? drop_time : pick_time)[e.action_id] = e.time_s;
    }
  }
  double total = 0.0;
  for (const auto& [id, pt] : pick_time) {
    auto it = drop_time.find(id);
    if (it == drop_time.end()) continue;
    total += std::max(0.0, pt - (it->second + actions[id].drift_s));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Action sampling
// ---------------------------------------------------------------------------

std::vector<CandidateAction> sample_actions(const FlowField& field, const Rect& workspace,
                                            int n, double drift_duration_s,
                                            const std::vector<Poi>& pois, uint64_t seed,
                                            double dt) {
  if (n < 1) throw std::invalid_argument("sample_actions: n must be >= 1");
  if (drift_duration_s <= 0.0) throw std::invalid_argument("sample_actions: T must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(workspace.xmin, workspace.xmax);
  std::uniform_real_distribution<double> uy(workspace.ymin, workspace.ymax);

  std::vector<CandidateAction> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    CandidateAction a;
    a.id = i;
    a.drop_pos = {ux(rng), uy(rng)};
    a.earliest_drop_s = 0.0;
    a.drift = integrate_trajectory(field, a.drop_pos, 0.0, drift_duration_s, dt);
    a.exits_workspace = a.drift.truncated;
    a.pick_pos = a.drift.endpoint();
    a.drift_s = a.drift.duration();
    for (size_t q = 0; q < pois.size(); ++q) {
      if (a.drift.distance_to(pois[q].pos) <= pois[q].r_obs) {
        a.covered.push_back(static_cast<int>(q));
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subset selection (MCTS over action additions)
// ---------------------------------------------------------------------------

namespace {

uint64_t coverage_mask(const CandidateAction& a) {
  uint64_t m = 0;
  for (int q : a.covered) m |= uint64_t{1} << q;
  return m;
}

int popcount(uint64_t m) { return static_cast<int>(std::popcount(m)); }

struct SelectNode {
  int action = -1;  // action added by the edge into this node
  int visits = 0;
  double total_reward = 0.0;
  std::vector<std::unique_ptr<SelectNode>> children;
  std::vector<int> untried;  // candidate actions not yet expanded
};

}  // namespace

int coverage_of(const std::vector<CandidateAction>& actions, const std::vector<int>& subset) {
  uint64_t m = 0;
  for (int i : subset) m |= coverage_mask(actions[i]);
  return popcount(m);
}

std::vector<int> greedy_set_cover(const std::vector<CandidateAction>& actions,
                                  const std::vector<Poi>& pois, int max_actions) {
  uint64_t covered = 0;
  std::vector<int> chosen;
  std::vector<bool> used(actions.size(), false);
  for (int step = 0; step < max_actions; ++step) {
    int best = -1, best_gain = 0;
    for (size_t i = 0; i < actions.size(); ++i) {
      if (used[i] || actions[i].exits_workspace) continue;
      int gain = popcount((coverage_mask(actions[i]) | covered) & ~covered);
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    chosen.push_back(best);
    used[best] = true;
    covered |= coverage_mask(actions[best]);
  }
  return chosen;
}

std::vector<int> select_actions_mcts(const std::vector<CandidateAction>& actions,
                                     const std::vector<Poi>& pois, int max_actions,
                                     const PlannerConfig& cfg) {
  if (actions.empty()) throw std::invalid_argument("select_actions_mcts: no candidate actions");
  if (max_actions < 1) throw std::invalid_argument("select_actions_mcts: max_actions >= 1");
  if (pois.size() > 64) throw std::invalid_argument("select_actions_mcts: at most 64 POIs");

  std::vector<int> eligible;
  for (size_t i = 0; i < actions.size(); ++i) {
    if (!actions[i].exits_workspace) eligible.push_back(static_cast<int>(i));
  }
  if (eligible.empty()) return {};

  std::mt19937_64 rng(cfg.seed);
  const double npois = static_cast<double>(std::max<size_t>(pois.size(), 1));
  auto reward_of = [&](const std::vector<int>& subset) {
    return (coverage_of(actions, subset) -
            cfg.count_penalty * static_cast<double>(subset.size())) /
           npois;
  };

  SelectNode root;
  root.untried = eligible;

  std::vector<int> best_subset;
  double best_reward = -kInf;
  auto consider = [&](const std::vector<int>& subset) {
    double r = reward_of(subset);
    if (r > best_reward) {
      best_reward = r;
      best_subset = subset;
    }
  };

  std::vector<int> path;
  for (int it = 0; it < cfg.mcts_iterations; ++it) {
    SelectNode* node = &root;
    path.clear();

    // Selection.
    while (node->untried.empty() && !node->children.empty()) {
      SelectNode* best_child = nullptr;
      double best_ucb = -kInf;
      for (auto& c : node->children) {
        double ucb = c->total_reward / c->visits +
                     cfg.exploration * std::sqrt(std::log(node->visits + 1.0) / c->visits);
        if (ucb > best_ucb) {
          best_ucb = ucb;
          best_child = c.get();
        }
      }
      node = best_child;
      path.push_back(node->action);
      if (static_cast<int>(path.size()) >= max_actions) break;
    }

    // Expansion.
    if (!node->untried.empty() && static_cast<int>(path.size()) < max_actions) {
      std::uniform_int_distribution<size_t> pick(0, node->untried.size() - 1);
      size_t k = pick(rng);
      int act = node->untried[k];
      node->untried.erase(node->untried.begin() + k);
      auto child = std::make_unique<SelectNode>();
      child->action = act;
      for (int e : eligible) {
        if (std::find(path.begin(), path.end(), e) == path.end() && e != act) {
          child->untried.push_back(e);
        }
      }
      node->children.push_back(std::move(child));
      node = node->children.back().get();
      path.push_back(act);
    }

    // Random-completion rollout.
    std::vector<int> rollout = path;
    std::vector<int> rest;
    for (int e : eligible) {
      if (std::find(rollout.begin(), rollout.end(), e) == rollout.end()) rest.push_back(e);
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    for (int e : rest) {
      if (static_cast<int>(rollout.size()) >= max_actions) break;
      rollout.push_back(e);
    }
    consider(rollout);
    consider(path);
    double r = reward_of(rollout);

    // Backpropagation.
    SelectNode* cur = &root;
    cur->visits++;
    cur->total_reward += r;
    for (int a : path) {
      for (auto& c : cur->children) {
        if (c->action == a) {
          cur = c.get();
          break;
        }
      }
      cur->visits++;
      cur->total_reward += r;
    }
  }

  // Weak-dominance guarantee against the single best action.
  for (int e : eligible) consider({e});

  std::sort(best_subset.begin(), best_subset.end());
  return best_subset;
}

// ---------------------------------------------------------------------------
// Joint schedule timing
// ---------------------------------------------------------------------------

std::optional<Schedule> timed_schedule(const std::vector<Vessel>& vessels,
                                       const std::vector<CandidateAction>& actions,
                                       const std::vector<std::vector<int>>& sequences,
                                       std::string* reason) {
  auto fail = [&](const std::string& why) -> std::optional<Schedule> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (sequences.size() != vessels.size()) return fail("sequence count != vessel count");

  // Uniqueness and capacity screening.
  std::map<int, int> owner;
  for (size_t v = 0; v < sequences.size(); ++v) {
    int drops = 0;
    for (int e : sequences[v]) {
      if (e < 0 || e >= 2 * static_cast<int>(actions.size())) return fail("bad event id");
      if (owner.count(e)) return fail("event assigned twice");
      owner[e] = static_cast<int>(v);
      if (!is_pick(e)) ++drops;
    }
    if (drops > vessels[v].capacity) return fail("vessel over float capacity at departure");
    // Running load: departs with exactly the floats it will drop.
    int carried = drops;
    for (int e : sequences[v]) {
      carried += is_pick(e) ? 1 : -1;
      if (carried > vessels[v].capacity) return fail("float capacity exceeded mid-route");
    }
  }
  for (const auto& [e, v] : owner) {
    // A drop without its pick is tolerated here so that partial plans can be
    // timed during search; validate_schedule enforces full pairing.
    if (is_pick(e) && !owner.count(e - 1)) return fail("pick without a scheduled drop");
  }

  // Worklist timing over the cross-vessel dependency DAG.
  std::map<int, double> event_time;
  std::vector<size_t> next(vessels.size(), 0);
  std::vector<double> vtime(vessels.size(), 0.0);
  std::vector<Vec2> vpos;
  for (const auto& v : vessels) vpos.push_back(v.start);

  size_t total = owner.size();
  while (event_time.size() < total) {
    bool progress = false;
    for (size_t v = 0; v < sequences.size(); ++v) {
      while (next[v] < sequences[v].size()) {
        int e = sequences[v][next[v]];
        int a = action_of(e);
        const Vec2& target = is_pick(e) ? actions[a].pick_pos : actions[a].drop_pos;
        double arrival = vtime[v] + distance(vpos[v], target) / vessels[v].speed;
        double t;
        if (is_pick(e)) {
          auto it = event_time.find(e - 1);
          if (it == event_time.end()) break;  // wait for the drop to be timed
          t = std::max(arrival, it->second + actions[a].drift_s);
        } else {
          t = std::max(arrival, actions[a].earliest_drop_s);
        }
        event_time[e] = t;
        vtime[v] = t;
        vpos[v] = target;
        ++next[v];
        progress = true;
      }
    }
    if (!progress) return fail("cyclic cross-vessel wait (deadlock)");
  }

  Schedule s;
  s.by_vessel.resize(vessels.size());
  s.float_of_action.assign(actions.size(), -1);
  int float_counter = 0;
  for (size_t v = 0; v < sequences.size(); ++v) {
    for (int e : sequences[v]) {
      int a = action_of(e);
      s.by_vessel[v].push_back({a, is_pick(e) ? EventKind::kPick : EventKind::kDrop,
                                event_time[e],
                                is_pick(e) ? actions[a].pick_pos : actions[a].drop_pos});
      if (!is_pick(e)) s.float_of_action[a] = float_counter++;
    }
  }
  return s;
}

void validate_schedule(const Schedule& s, const std::vector<Vessel>& vessels,
                       const std::vector<CandidateAction>& actions) {
  if (s.by_vessel.size() != vessels.size()) throw std::logic_error("vessel count mismatch");
  std::map<int, double> drop_time, pick_time;
  for (size_t v = 0; v < s.by_vessel.size(); ++v) {
    const Vessel& vessel = vessels[v];
    Vec2 pos = vessel.start;
    double t = 0.0;
    int drops = 0;
    for (const auto& e : s.by_vessel[v]) {
      if (e.kind == EventKind::kDrop) ++drops;
    }
    if (drops > vessel.capacity) throw std::logic_error("capacity exceeded at departure");
    int carried = drops;
    for (const auto& e : s.by_vessel[v]) {
      double travel = distance(pos, e.pos) / vessel.speed;
      if (e.time_s + 1e-6 < t + travel) {
        throw std::logic_error("scheduled position unreachable at vessel speed");
      }
      carried += e.kind == EventKind::kPick ? 1 : -1;
      if (carried > vessel.capacity || carried < 0) {
        throw std::logic_error("float capacity violated mid-route");
      }
      (e.kind == EventKind::kDrop ? drop_time : pick_time)[e.action_id] = e.time_s;
      pos = e.pos;
      t = e.time_s;
    }
  }
  for (const auto& [a, dt] : drop_time) {
    auto it = pick_time.find(a);
    if (it == pick_time.end()) throw std::logic_error("dropped float without a scheduled pick");
    if (it->second + 1e-6 < dt + actions[a].drift_s) {
      throw std::logic_error("pick scheduled before drop + drift duration");
    }
  }
  for (const auto& [a, pt] : pick_time) {
    if (!drop_time.count(a)) throw std::logic_error("pick without a drop");
  }
}

// ---------------------------------------------------------------------------
// Exhaustive oracle
// ---------------------------------------------------------------------------

namespace {

struct ExhaustiveState {
  const std::vector<Vessel>* vessels;
  const std::vector<CandidateAction>* actions;
  std::vector<std::vector<int>> sequences;
  std::vector<double> vtime;
  std::vector<Vec2> vpos;
  std::vector<double> drop_time;  // per action, -1 if not yet dropped
  double last_time = 0.0;
  double best_makespan = kInf;
  std::vector<std::vector<int>> best_sequences;
  int placed = 0;
  int total_events = 0;

  void dfs() {
    if (placed == total_events) {
      // Capacity feasibility: a vessel departs with exactly the floats it
      // will drop and may never exceed its capacity mid-route.
      for (size_t v = 0; v < sequences.size(); ++v) {
        int drops = 0;
        for (int e : sequences[v]) {
          if (!is_pick(e)) ++drops;
        }
        if (drops > (*vessels)[v].capacity) return;
        int carried = drops;
        for (int e : sequences[v]) {
          carried += is_pick(e) ? 1 : -1;
          if (carried > (*vessels)[v].capacity) return;
        }
      }
      double mk = 0.0;
      for (double t : vtime) mk = std::max(mk, t);
      if (mk < best_makespan - kEps ||
          (mk < best_makespan + kEps &&
           (best_sequences.empty() || sequences < best_sequences))) {
        best_makespan = std::min(best_makespan, mk);
        best_sequences = sequences;
      }
      return;
    }
    int na = static_cast<int>(actions->size());
    for (size_t v = 0; v < vessels->size(); ++v) {
      for (int e = 0; e < 2 * na; ++e) {
        bool taken = false;
        for (const auto& seq : sequences) {
          if (std::find(seq.begin(), seq.end(), e) != seq.end()) taken = true;
        }
        if (taken) continue;
        int a = action_of(e);
        if (is_pick(e) && drop_time[a] < 0.0) continue;
        const Vec2& target = is_pick(e) ? (*actions)[a].pick_pos : (*actions)[a].drop_pos;
        double arrival = vtime[v] + distance(vpos[v], target) / (*vessels)[v].speed;
        double t = is_pick(e) ? std::max(arrival, drop_time[a] + (*actions)[a].drift_s)
                              : std::max(arrival, (*actions)[a].earliest_drop_s);
        // Chronological construction: each joint plan is generated once.
        if (t < last_time - kEps) continue;
        if (t > best_makespan + kEps) continue;

        double save_t = vtime[v], save_last = last_time, save_drop = drop_time[a];
        Vec2 save_p = vpos[v];
        sequences[v].push_back(e);
        vtime[v] = t;
        vpos[v] = target;
        last_time = t;
        if (!is_pick(e)) drop_time[a] = t;
        ++placed;

        dfs();

        --placed;
        sequences[v].pop_back();
        vtime[v] = save_t;
        vpos[v] = save_p;
        last_time = save_last;
        drop_time[a] = save_drop;
      }
    }
  }
};

}  // namespace

Schedule exhaustive_schedule(const std::vector<Vessel>& vessels,
                             const std::vector<CandidateAction>& actions) {
  int total = 2 * static_cast<int>(actions.size());
  if (total > 10) {
    throw std::invalid_argument("exhaustive_schedule: more than 10 events");
  }
  ExhaustiveState st;
  st.vessels = &vessels;
  st.actions = &actions;
  st.sequences.resize(vessels.size());
  st.vtime.assign(vessels.size(), 0.0);
  for (const auto& v : vessels) st.vpos.push_back(v.start);
  st.drop_time.assign(actions.size(), -1.0);
  st.total_events = total;
  st.dfs();
  if (st.best_sequences.empty() && total > 0) {
    // Capacity screening happens in timed_schedule; retry without the
    // chronological-prune shortcut only matters when nothing was feasible.
    throw InfeasibleError("exhaustive_schedule: no feasible schedule");
  }
  std::string reason;
  auto s = timed_schedule(vessels, actions, st.best_sequences.empty()
                                                ? std::vector<std::vector<int>>(vessels.size())
                                                : st.best_sequences,
                          &reason);
  if (!s) throw InfeasibleError("exhaustive_schedule: best plan infeasible: " + reason);
  return *s;
}

// ---------------------------------------------------------------------------
// Dec-MCTS
// ---------------------------------------------------------------------------

namespace {

struct JointEval {
  double cost = kInf;
  Schedule schedule;
  std::vector<std::vector<int>> sequences;
  bool feasible = false;
};

double plan_cost(const Schedule& s, const std::vector<CandidateAction>& actions,
                 double unattended_weight) {
  return s.makespan() + unattended_weight * s.total_unattended(actions);
}

/// Greedy completion: insert each missing event at the feasible position of
/// minimum joint cost.
bool complete_sequences(std::vector<std::vector<int>>& seqs,
                        const std::vector<Vessel>& vessels,
                        const std::vector<CandidateAction>& actions, double w) {
  int na = static_cast<int>(actions.size());
  std::vector<bool> present(2 * na, false);
  for (const auto& s : seqs) {
    for (int e : s) present[e] = true;
  }
  for (int e = 0; e < 2 * na; ++e) {
    if (present[e]) continue;
    double best = kInf;
    size_t bv = 0, bi = 0;
    for (size_t v = 0; v < seqs.size(); ++v) {
      for (size_t i = 0; i <= seqs[v].size(); ++i) {
        seqs[v].insert(seqs[v].begin() + i, e);
        auto timed = timed_schedule(vessels, actions, seqs, nullptr);
        if (timed) {
          // Partial plans may still miss later events; score by what exists.
          // Drops are inserted before their picks (ascending event order).
          double c = plan_cost(*timed, actions, w);
          if (c < best) {
            best = c;
            bv = v;
            bi = i;
          }
        }
        seqs[v].erase(seqs[v].begin() + i);
      }
    }
    if (best == kInf) return false;
    seqs[bv].insert(seqs[bv].begin() + bi, e);
    present[e] = true;
  }
  return true;
}

struct DecNode {
  int event = -2;  // -1 = stop sentinel
  int visits = 0;
  double total_reward = 0.0;
  std::vector<std::unique_ptr<DecNode>> children;
  std::vector<int> untried;
  bool untried_init = false;
};

struct SequenceEntry {
  std::vector<int> seq;
  double cost = kInf;
};

}  // namespace

Schedule schedule_decmcts(const std::vector<Vessel>& vessels,
                          const std::vector<CandidateAction>& actions,
                          const PlannerConfig& cfg) {
  if (vessels.empty()) throw std::invalid_argument("schedule_decmcts: no vessels");
  const int na = static_cast<int>(actions.size());
  const int ne = 2 * na;
  if (na == 0) {
    Schedule s;
    s.by_vessel.resize(vessels.size());
    return s;
  }
  int fleet_capacity = 0;
  for (const auto& v : vessels) fleet_capacity += v.capacity;
  if (na > fleet_capacity) {
    throw InfeasibleError("schedule_decmcts: more floats needed than fleet capacity");
  }
  const double w = cfg.unattended_weight;

  // Greedy seed: insert every event at its cheapest feasible position.
  std::vector<std::vector<int>> greedy_seqs(vessels.size());
  if (!complete_sequences(greedy_seqs, vessels, actions, w)) {
    throw InfeasibleError("schedule_decmcts: no feasible greedy completion");
  }
  auto greedy_timed = timed_schedule(vessels, actions, greedy_seqs, nullptr);
  if (!greedy_timed) throw InfeasibleError("schedule_decmcts: greedy plan infeasible");

  JointEval best;
  best.cost = plan_cost(*greedy_timed, actions, w);
  best.schedule = *greedy_timed;
  best.sequences = greedy_seqs;
  best.feasible = true;
  const double cost_scale = std::max(best.cost, 1.0);

  auto evaluate = [&](std::vector<std::vector<int>> seqs) -> double {
    // Drop duplicate claims (first vessel keeps) then complete missing events.
    std::vector<bool> seen(ne, false);
    for (auto& s : seqs) {
      std::vector<int> kept;
      for (int e : s) {
        if (!seen[e]) {
          seen[e] = true;
          kept.push_back(e);
        }
      }
      s = std::move(kept);
    }
    if (!complete_sequences(seqs, vessels, actions, w)) return kInf;
    auto timed = timed_schedule(vessels, actions, seqs, nullptr);
    if (!timed) return kInf;
    double c = plan_cost(*timed, actions, w);
    if (c < best.cost - kEps ||
        (c < best.cost + kEps && seqs < best.sequences)) {
      if (c < best.cost) best.cost = c;
      best.schedule = *timed;
      best.sequences = seqs;
    }
    return c;
  };

  // Per-vessel plan distributions (top-k sequences with weights).
  std::vector<std::vector<SequenceEntry>> dist(vessels.size());
  for (size_t v = 0; v < vessels.size(); ++v) {
    dist[v].push_back({greedy_seqs[v], best.cost});
  }

  std::vector<std::unique_ptr<DecNode>> roots(vessels.size());
  for (auto& r : roots) {
    r = std::make_unique<DecNode>();
  }

  auto init_untried = [&](DecNode& node, const std::vector<int>& prefix) {
    node.untried.clear();
    if (node.event == -1) return;  // stopped
    for (int e = 0; e < ne; ++e) {
      if (std::find(prefix.begin(), prefix.end(), e) == prefix.end()) {
        node.untried.push_back(e);
      }
    }
    node.untried.push_back(-1);  // stop sentinel
    node.untried_init = true;
  };

  for (int round = 0; round < cfg.decmcts_rounds; ++round) {
    for (size_t v = 0; v < vessels.size(); ++v) {
      std::mt19937_64 rng(cfg.seed * 1000003ULL + v * 7919ULL + round * 31ULL);
      DecNode* root = roots[v].get();
      if (!root->untried_init) init_untried(*root, {});

      std::map<std::vector<int>, double> local_best;

      for (int it = 0; it < cfg.decmcts_iterations; ++it) {
        DecNode* node = root;
        std::vector<int> prefix;

        while (node->untried.empty() && !node->children.empty()) {
          DecNode* best_child = nullptr;
          double best_ucb = -kInf;
          for (auto& c : node->children) {
            double ucb = c->total_reward / c->visits +
                         cfg.exploration * std::sqrt(std::log(node->visits + 1.0) / c->visits);
            if (ucb > best_ucb) {
              best_ucb = ucb;
              best_child = c.get();
            }
          }
          node = best_child;
          if (node->event >= 0) prefix.push_back(node->event);
          if (node->event == -1) break;
        }

        if (!node->untried.empty()) {
          std::uniform_int_distribution<size_t> pick(0, node->untried.size() - 1);
          size_t k = pick(rng);
          int e = node->untried[k];
          node->untried.erase(node->untried.begin() + k);
          auto child = std::make_unique<DecNode>();
          child->event = e;
          node->children.push_back(std::move(child));
          node = node->children.back().get();
          if (e >= 0) prefix.push_back(e);
          init_untried(*node, prefix);
        }

        // Random completion of this vessel's claim.
        std::vector<int> mine = prefix;
        if (node->event != -1) {
          std::vector<int> rest;
          for (int e = 0; e < ne; ++e) {
            if (std::find(mine.begin(), mine.end(), e) == mine.end()) rest.push_back(e);
          }
          std::shuffle(rest.begin(), rest.end(), rng);
          std::uniform_real_distribution<double> coin(0.0, 1.0);
          double claim_p = 1.0 / static_cast<double>(vessels.size());
          for (int e : rest) {
            if (coin(rng) < claim_p) mine.push_back(e);
          }
        }

        // Score against sampled peer plans.
        double cost_sum = 0.0;
        int cost_n = 0;
        for (int ps = 0; ps < cfg.peer_samples; ++ps) {
          std::vector<std::vector<int>> seqs(vessels.size());
          seqs[v] = mine;
          for (size_t u = 0; u < vessels.size(); ++u) {
            if (u == v || dist[u].empty()) continue;
            std::uniform_int_distribution<size_t> du(0, dist[u].size() - 1);
            const auto& peer = dist[u][du(rng)].seq;
            for (int e : peer) {
              if (std::find(mine.begin(), mine.end(), e) == mine.end()) {
                seqs[u].push_back(e);
              }
            }
          }
          double c = evaluate(seqs);
          if (std::isfinite(c)) {
            cost_sum += c;
            ++cost_n;
          }
        }
        double avg = cost_n > 0 ? cost_sum / cost_n : 2.0 * cost_scale;
        double reward = std::max(0.0, 2.0 - avg / cost_scale);

        auto lit = local_best.find(mine);
        if (lit == local_best.end() || avg < lit->second) local_best[mine] = avg;

        // Backpropagate.
        DecNode* cur = root;
        cur->visits++;
        cur->total_reward += reward;
        size_t pi = 0;
        DecNode* walker = root;
        while (pi <= prefix.size()) {
          int want = pi < prefix.size() ? prefix[pi] : (node->event == -1 ? -1 : -2);
          if (want == -2) break;
          DecNode* nxt = nullptr;
          for (auto& c : walker->children) {
            if (c->event == want) nxt = c.get();
          }
          if (!nxt) break;
          nxt->visits++;
          nxt->total_reward += reward;
          walker = nxt;
          ++pi;
        }
      }

      // Refresh this vessel's plan distribution with its best-k sequences.
      std::vector<SequenceEntry> entries;
      for (const auto& [seq, c] : local_best) entries.push_back({seq, c});
      std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.cost != b.cost ? a.cost < b.cost : a.seq < b.seq;
      });
      if (static_cast<int>(entries.size()) > cfg.plan_distribution_size) {
        entries.resize(cfg.plan_distribution_size);
      }
      if (!entries.empty()) dist[v] = std::move(entries);
    }
  }

  // Deterministic hill-climb polish on the best joint plan found.
  bool improved = true;
  int guard = 0;
  while (improved && guard++ < 200) {
    improved = false;
    auto seqs = best.sequences;
    double cur_cost = best.cost;
    for (size_t v = 0; v < seqs.size() && !improved; ++v) {
      for (size_t i = 0; i < seqs[v].size() && !improved; ++i) {
        int e = seqs[v][i];
        for (size_t u = 0; u < seqs.size() && !improved; ++u) {
          for (size_t j = 0; j <= seqs[u].size() && !improved; ++j) {
            if (u == v && (j == i || j == i + 1)) continue;
            auto trial = seqs;
            trial[v].erase(trial[v].begin() + i);
            size_t jj = (u == v && j > i) ? j - 1 : j;
            trial[u].insert(trial[u].begin() + jj, e);
            auto timed = timed_schedule(vessels, actions, trial, nullptr);
            if (!timed) continue;
            double c = plan_cost(*timed, actions, w);
            if (c < cur_cost - 1e-6) {
              best.cost = c;
              best.schedule = *timed;
              best.sequences = trial;
              improved = true;
            }
          }
        }
      }
    }
  }

  validate_schedule(best.schedule, vessels, actions);
  return best.schedule;
}

// ---------------------------------------------------------------------------
// Wake-safe transit planning
// ---------------------------------------------------------------------------

namespace {

double path_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) len += distance(pts[i], pts[i + 1]);
  return len;
}

TimedPath timed_path(const std::vector<Vec2>& pts, double depart, double speed) {
  TimedPath tp;
  double t = depart;
  tp.samples.push_back({t, pts.front()});
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    t += distance(pts[i], pts[i + 1]) / speed;
    tp.samples.push_back({t, pts[i + 1]});
  }
  return tp;
}

std::vector<FloatDriftWindow> drift_windows(const Schedule& s,
                                            const std::vector<CandidateAction>& actions) {
  std::vector<FloatDriftWindow> out;
  for (const auto& seq : s.by_vessel) {
    for (const auto& e : seq) {
      if (e.kind != EventKind::kDrop) continue;
      const CandidateAction& a = actions[e.action_id];
      FloatDriftWindow fw;
      fw.action_id = e.action_id;
      fw.drop_s = e.time_s;
      fw.end_s = e.time_s + a.drift_s;
      fw.path = a.drift;
      double shift = e.time_s - a.drift.samples.front().t;
      for (auto& sm : fw.path.samples) sm.t += shift;
      out.push_back(std::move(fw));
    }
  }
  return out;
}

/// Conflicts for one candidate leg against all drift windows except the
/// excluded action ids.
bool leg_conflicts(const std::vector<Vec2>& pts, double depart, double speed,
                   const std::vector<FloatDriftWindow>& floats, double d_wake, double grace,
                   double dt, int exclude_a, int exclude_b) {
  TimedPath tp = timed_path(pts, depart, speed);
  std::vector<FloatDriftWindow> subset;
  for (const auto& f : floats) {
    if (f.action_id != exclude_a && f.action_id != exclude_b) subset.push_back(f);
  }
  return !detect_wake_conflicts({tp}, subset, d_wake, grace, dt).empty();
}

}  // namespace

TransitPlan plan_wake_safe_transits(const Schedule& s, const std::vector<Vessel>& vessels,
                                    const std::vector<CandidateAction>& actions,
                                    double d_wake, const Rect& workspace,
                                    const WakeAvoidOptions& opts) {
  TransitPlan plan;
  auto floats = drift_windows(s, actions);

  for (size_t v = 0; v < s.by_vessel.size(); ++v) {
    const Vessel& vessel = vessels[v];
    Vec2 pos = vessel.start;
    double t = 0.0;
    int prev_action = -1;
    bool prev_was_drop = false;
    for (const auto& e : s.by_vessel[v]) {
      TransitLeg leg;
      leg.vessel = static_cast<int>(v);
      leg.depart_s = t;
      std::vector<Vec2> direct{pos, e.pos};

      // The departure from a just-dropped float and the final approach to a
      // pick are sanctioned contact; exclude those two actions.
      int ex_a = prev_was_drop ? prev_action : -1;
      int ex_b = e.kind == EventKind::kPick ? e.action_id : -1;

      std::vector<Vec2> chosen = direct;
      bool ok = d_wake <= 0.0 ||
                !leg_conflicts(direct, t, vessel.speed, floats, d_wake, opts.grace_s,
                               opts.sample_dt_s, ex_a, ex_b);
      if (!ok) {
        // Route around the inflated bounding box of each offending drift.
        double best_len = kInf;
        for (const auto& f : floats) {
          if (f.action_id == ex_a || f.action_id == ex_b) continue;
          Rect bb{kInf, kInf, -kInf, -kInf};
          for (const auto& sm : f.path.samples) {
            bb.xmin = std::min(bb.xmin, sm.p.x);
            bb.xmax = std::max(bb.xmax, sm.p.x);
            bb.ymin = std::min(bb.ymin, sm.p.y);
            bb.ymax = std::max(bb.ymax, sm.p.y);
          }
          for (double inflate : {1.25 * d_wake, 2.0 * d_wake, 3.0 * d_wake}) {
            Rect ib = {bb.xmin - inflate, bb.ymin - inflate, bb.xmax + inflate,
                       bb.ymax + inflate};
            std::vector<std::vector<Vec2>> cands;
            cands.push_back({pos, {ib.xmin, ib.ymin}, {ib.xmax, ib.ymin}, e.pos});
            cands.push_back({pos, {ib.xmin, ib.ymax}, {ib.xmax, ib.ymax}, e.pos});
            cands.push_back({pos, {ib.xmin, ib.ymin}, {ib.xmin, ib.ymax}, e.pos});
            cands.push_back({pos, {ib.xmax, ib.ymin}, {ib.xmax, ib.ymax}, e.pos});
            for (auto& c : cands) {
              bool inside = true;
              for (const auto& p : c) {
                if (!workspace.contains(p)) inside = false;
              }
              if (!inside) continue;
              if (leg_conflicts(c, t, vessel.speed, floats, d_wake, opts.grace_s,
                                opts.sample_dt_s, ex_a, ex_b)) {
                continue;
              }
              double len = path_length(c);
              if (len < best_len) {
                best_len = len;
                chosen = c;
                ok = true;
              }
            }
          }
        }
        if (!ok) {
          throw InfeasibleError("plan_wake_safe_transits: no wake-clear path in workspace");
        }
        leg.rerouted = true;
      }

      leg.waypoints = chosen;
      double arrive = t + path_length(chosen) / vessel.speed;
      leg.arrive_s = std::max(arrive, e.time_s);
      leg.induced_delay_s = std::max(0.0, arrive - e.time_s);
      plan.max_induced_delay_s = std::max(plan.max_induced_delay_s, leg.induced_delay_s);
      plan.legs.push_back(leg);

      pos = e.pos;
      t = std::max(e.time_s, arrive);
      prev_action = e.action_id;
      prev_was_drop = e.kind == EventKind::kDrop;
    }
  }
  return plan;
}

Schedule retime_schedule(const Schedule& s, const std::vector<Vessel>& vessels,
                         const std::vector<CandidateAction>& actions,
                         const TransitPlan& plan) {
  // Leg path lengths per (vessel, event index).
  std::vector<std::vector<double>> lengths(s.by_vessel.size());
  for (const auto& leg : plan.legs) {
    lengths[leg.vessel].push_back(path_length(leg.waypoints));
  }

  Schedule out = s;
  std::map<int, double> drop_time;
  // Two passes resolve cross-vessel pick-after-drop dependencies.
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t v = 0; v < out.by_vessel.size(); ++v) {
      double t = 0.0;
      for (size_t i = 0; i < out.by_vessel[v].size(); ++i) {
        ScheduledEvent& e = out.by_vessel[v][i];
        double travel = lengths[v][i] / vessels[v].speed;
        double arrival = t + travel;
        if (e.kind == EventKind::kDrop) {
          e.time_s = std::max(arrival, actions[e.action_id].earliest_drop_s);
          drop_time[e.action_id] = e.time_s;
        } else {
          double ready = drop_time.count(e.action_id)
                             ? drop_time[e.action_id] + actions[e.action_id].drift_s
                             : e.time_s;
          e.time_s = std::max(arrival, ready);
        }
        t = e.time_s;
      }
    }
  }
  return out;
}

}  // namespace mvmf
