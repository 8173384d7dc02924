#pragma once

#include <string>
#include <vector>

#include "mvmf/gp.hpp"
#include "mvmf/tracks.hpp"
#include "mvmf/trajectory.hpp"

namespace mvmf {

/// Mean pointwise distance between the trajectory predicted by `field`
/// (integrated from the track's first fix over its duration) and the observed
/// positions at the observed times.
double trajectory_prediction_error(const FlowField& field, const DrifterTrack& track,
                                   double dt = 1.0);

struct ParamGrid {
  std::vector<double> length_scales{25.0, 50.0, 100.0, 200.0};
  std::vector<double> signal_stds{0.05, 0.1, 0.2};
  std::vector<double> noise_stds{0.005, 0.01, 0.02};
};

struct GridSearchOptions {
  double subsample_interval_s = 30.0;
  double integration_dt_s = 1.0;
};

struct GridSearchResult {
  Hyperparams best;
  double best_score = 0.0;  // holdout trajectory prediction error, meters
  struct Entry {
    Hyperparams hp;
    double score = 0.0;
    bool failed = false;
    std::string error;
  };
  std::vector<Entry> entries;
};

/// Leave-one-track-out hyperparameter search: fit on every track except the
/// holdout, score by trajectory prediction error on the holdout. Ties broken
/// by larger noise_std, then larger length_scale (prefer smoother fields).
GridSearchResult grid_search(Rect workspace, const std::vector<DrifterTrack>& tracks,
                             const ParamGrid& grid, const std::string& holdout_id,
                             const GridSearchOptions& opts = {});

}  // namespace mvmf
