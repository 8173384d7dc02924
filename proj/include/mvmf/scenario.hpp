#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmf/flowfield.hpp"
#include "mvmf/planner.hpp"
#include "mvmf/sim.hpp"
#include "mvmf/tracks.hpp"
#include "mvmf/tuning.hpp"

namespace mvmf {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DrifterSpec {
  int count = 3;
  std::string formation = "triangle";
  Vec2 center;
  double spacing_m = 60.0;
  double duration_s = 600.0;
  double fix_interval_s = 1.0;
  double gps_noise_m = 3.0;
};

struct EstimatorSpec {
  double subsample_s = 30.0;
  ParamGrid grid;
  double process_noise = 0.005;  // m/s^2, smoother model accel
  double meas_noise_m = 3.0;
  double raster_spacing_m = 1.0;
};

struct PlannerSpec {
  PlannerConfig config;
  int n_samples = 200;
  double drift_duration_s = 600.0;
  int max_actions = 5;
};

/// One scenario file drives the whole pipeline; unknown keys are rejected.
struct Scenario {
  Rect workspace{0, 0, 390, 390};
  nlohmann::json truth_spec;
  std::shared_ptr<const FlowField> truth;
  std::vector<Vessel> vessels;
  int float_count = 2;
  std::vector<Poi> pois;
  DrifterSpec drifters;
  EstimatorSpec estimator;
  PlannerSpec planner;
  SimParams sim;
  uint64_t seed = 1;
};

/// Builds a flow field from its JSON spec (see README for the schema).
std::shared_ptr<const FlowField> build_field(const nlohmann::json& spec, const Rect& workspace);

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

/// Synthesizes drifter tracks by advecting formation release points through
/// the truth field and adding per-fix GPS noise. Deterministic in the seed.
std::vector<DrifterTrack> synthesize_tracks(const Scenario& sc, const FlowField& field,
                                            double t0 = 0.0);

}  // namespace mvmf
