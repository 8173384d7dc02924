#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmf/gp.hpp"
#include "mvmf/scenario.hpp"
#include "mvmf/sim.hpp"

namespace mvmf {

/// File-level pipeline behind the CLI subcommands. Each run_* function does
/// the work and writes its artifacts under out_dir; errors propagate as the
/// module exceptions (ScenarioError, InfeasibleError, ...).

struct EstimateOutput {
  Hyperparams best;
  double holdout_error_m = 0.0;
  std::string field_path;       // GridField JSON raster of the posterior mean
  std::string covariance_path;  // CSV raster of the posterior covariance trace
};

/// kalman_smooth -> track_to_measurements -> grid_search -> fit, then rasters
/// the posterior onto a GridField. Needs at least two tracks (leave-one-out).
EstimateOutput run_estimate(const Scenario& sc, const std::vector<DrifterTrack>& tracks,
                            const std::string& out_dir);

struct PlanOutput {
  std::vector<CandidateAction> actions;  // full candidate set
  std::vector<int> selected;
  Schedule schedule;
  TransitPlan transits;
  bool has_transits = false;
  double oracle_makespan = -1.0;  // filled when oracle_check ran
  std::string plan_path;
};

/// sample_actions -> select_actions_mcts -> schedule_decmcts
/// (-> plan_wake_safe_transits + retime when the scenario asks for it).
PlanOutput run_plan(const Scenario& sc, const FlowField& field, const std::string& out_dir,
                    bool oracle_check = false);

struct SimulateOptions {
  double start_delay_s = 0.0;
  double rotate_deg_per_hour = 0.0;
  int wake_override = -1;  // -1 keep scenario setting, 0 force off, 1 force on
};

struct SimulateOutput {
  MissionLog log;
  TardinessReport tardiness;
  std::string report_path;
};

SimulateOutput run_simulate(const Scenario& sc, const nlohmann::json& plan,
                            const SimulateOptions& opts, const std::string& out_dir);

/// Recomputes report.json from a saved mission log + plan.
std::string run_evaluate(const std::string& log_path, const std::string& plan_path,
                         const std::string& out_dir);

/// Re-emits the CSV/JSONL/GeoJSON exports from a saved mission log.
std::vector<std::string> run_replay(const std::string& log_path, const std::string& out_dir);

// Serialization helpers shared by the commands and their tests.
nlohmann::json plan_to_json(const Scenario& sc, const PlanOutput& plan);
void plan_from_json(const nlohmann::json& j, std::vector<CandidateAction>* actions,
                    std::vector<int>* selected, Schedule* schedule, TransitPlan* transits,
                    bool* has_transits);
nlohmann::json mission_log_to_json(const MissionLog& log);
MissionLog mission_log_from_json(const nlohmann::json& j);

}  // namespace mvmf
