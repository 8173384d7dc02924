// Command-line front end for the estimation / planning / simulation pipeline.
//
// Exit codes: 0 success, 2 input error, 3 infeasible, 4 internal error.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mvmf/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kInfeasible = 3;
constexpr int kInternal = 4;

mvmf::Scenario load(const std::string& scenario_path, int64_t seed_override) {
  mvmf::Scenario sc = mvmf::load_scenario(scenario_path);
  if (seed_override >= 0) {
    sc.seed = static_cast<uint64_t>(seed_override);
    sc.sim.seed = sc.seed;
    sc.planner.config.seed = sc.seed;
  }
  return sc;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mvmf::ScenarioError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-vessel multi-float planning and simulation toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", tracks_path, field_path, plan_path, log_path;
  int64_t seed = -1;
  bool synthesize = false, oracle_check = false;
  std::string wake = "keep";
  double start_delay_s = 0.0, rotate_deg_per_hour = 0.0;

  auto* est = app.add_subcommand("estimate", "Estimate the flow field from drifter tracks");
  est->add_option("--scenario", scenario_path)->required();
  est->add_option("--out-dir", out_dir);
  est->add_option("--seed", seed);
  est->add_option("--tracks", tracks_path, "Drifter tracks CSV");
  est->add_flag("--synthesize", synthesize, "Synthesize tracks from the scenario truth field");

  auto* plan = app.add_subcommand("plan", "Select actions and schedule the fleet");
  plan->add_option("--scenario", scenario_path)->required();
  plan->add_option("--out-dir", out_dir);
  plan->add_option("--seed", seed);
  plan->add_option("--field", field_path, "Estimated field JSON (default: scenario truth)");
  plan->add_flag("--oracle-check", oracle_check,
                 "Also run the exhaustive scheduler and record its makespan");

  auto* sim = app.add_subcommand("simulate", "Execute a plan in the closed-loop simulator");
  sim->add_option("--scenario", scenario_path)->required();
  sim->add_option("--plan", plan_path)->required();
  sim->add_option("--out-dir", out_dir);
  sim->add_option("--seed", seed);
  sim->add_option("--wake", wake, "on|off (default: scenario setting)")
      ->check(CLI::IsMember({"on", "off", "keep"}));
  sim->add_option("--start-delay-s", start_delay_s);
  sim->add_option("--rotate-deg-per-hour", rotate_deg_per_hour,
                  "Rotate the truth-field pattern at this rate");

  auto* eval = app.add_subcommand("evaluate", "Recompute reports from a saved mission log");
  eval->add_option("--log", log_path)->required();
  eval->add_option("--plan", plan_path)->required();
  eval->add_option("--out-dir", out_dir);

  auto* replay = app.add_subcommand("replay", "Re-emit CSV/JSONL/GeoJSON exports from a log");
  replay->add_option("--log", log_path)->required();
  replay->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (est->parsed()) {
      mvmf::Scenario sc = load(scenario_path, seed);
      std::vector<mvmf::DrifterTrack> tracks;
      if (synthesize) {
        tracks = mvmf::synthesize_tracks(sc, *sc.truth);
      } else if (!tracks_path.empty()) {
        std::ifstream in(tracks_path);
        if (!in) throw mvmf::ScenarioError("cannot open " + tracks_path);
        std::stringstream buf;
        buf << in.rdbuf();
        tracks = mvmf::tracks_from_csv(buf.str());
      } else {
        throw mvmf::ScenarioError("estimate needs --tracks or --synthesize");
      }
      auto out = mvmf::run_estimate(sc, tracks, out_dir);
      std::cout << "estimated field -> " << out.field_path
                << " (holdout error " << out.holdout_error_m << " m)\n";
    } else if (plan->parsed()) {
      mvmf::Scenario sc = load(scenario_path, seed);
      std::shared_ptr<const mvmf::FlowField> field = sc.truth;
      if (!field_path.empty()) {
        std::ifstream in(field_path);
        if (!in) throw mvmf::ScenarioError("cannot open " + field_path);
        std::stringstream buf;
        buf << in.rdbuf();
        field = std::make_shared<mvmf::GridField>(mvmf::GridField::from_json(buf.str()));
      }
      auto out = mvmf::run_plan(sc, *field, out_dir, oracle_check);
      std::cout << "plan -> " << out.plan_path << " (makespan " << out.schedule.makespan()
                << " s";
      if (out.oracle_makespan >= 0.0) std::cout << ", oracle " << out.oracle_makespan << " s";
      std::cout << ")\n";
    } else if (sim->parsed()) {
      mvmf::Scenario sc = load(scenario_path, seed);
      mvmf::SimulateOptions opts;
      opts.start_delay_s = start_delay_s;
      opts.rotate_deg_per_hour = rotate_deg_per_hour;
      if (wake == "on") opts.wake_override = 1;
      if (wake == "off") opts.wake_override = 0;
      auto out = mvmf::run_simulate(sc, read_json(plan_path), opts, out_dir);
      std::cout << "simulated -> " << out.report_path << " (mean tardiness "
                << out.tardiness.mean << " s, lost " << out.log.lost_floats << ")\n";
    } else if (eval->parsed()) {
      std::cout << "report -> " << mvmf::run_evaluate(log_path, plan_path, out_dir) << "\n";
    } else if (replay->parsed()) {
      for (const auto& p : mvmf::run_replay(log_path, out_dir)) {
        std::cout << "wrote " << p << "\n";
      }
    }
  } catch (const mvmf::ScenarioError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const mvmf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
