#include "mvmf/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvmf {

double trajectory_prediction_error(const FlowField& field, const DrifterTrack& track,
                                   double dt) {
  if (track.fixes.empty()) throw std::invalid_argument("empty track");
  if (track.fixes.size() == 1) return 0.0;
  const RawFix& first = track.fixes.front();
  Trajectory pred = integrate_trajectory(field, first.p, first.t, track.duration(), dt);
  double sum = 0.0;
  int n = 0;
  for (const auto& f : track.fixes) {
    if (!f.received) continue;
    sum += distance(pred.position_at(f.t), f.p);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

GridSearchResult grid_search(Rect workspace, const std::vector<DrifterTrack>& tracks,
                             const ParamGrid& grid, const std::string& holdout_id,
                             const GridSearchOptions& opts) {
  if (tracks.size() < 2) throw std::invalid_argument("grid_search: need at least 2 tracks");
  if (grid.length_scales.empty() || grid.signal_stds.empty() || grid.noise_stds.empty()) {
    throw std::invalid_argument("grid_search: empty parameter grid");
  }

  const DrifterTrack* holdout = nullptr;
  std::vector<Measurement> train;
  for (const auto& t : tracks) {
    if (t.id == holdout_id) {
      holdout = &t;
    } else {
      auto ms = track_to_measurements(t, opts.subsample_interval_s);
      train.insert(train.end(), ms.begin(), ms.end());
    }
  }
  if (!holdout) throw std::invalid_argument("grid_search: holdout track not found");

  GridSearchResult result;
  bool have_best = false;
  constexpr double score_tol = 1e-12;
  for (double l : grid.length_scales) {
    for (double sf : grid.signal_stds) {
      for (double sn : grid.noise_stds) {
        GridSearchResult::Entry e;
        e.hp = Hyperparams{l, sf, sn};
        try {
          EstimatedField field = fit_divergence_free_gp(workspace, train, e.hp);
          e.score = trajectory_prediction_error(field, *holdout, opts.integration_dt_s);
        } catch (const std::exception& ex) {
          e.failed = true;
          e.error = ex.what();
        }
        if (!e.failed) {
          bool better = false;
          if (!have_best || e.score < result.best_score - score_tol) {
            better = true;
          } else if (std::abs(e.score - result.best_score) <= score_tol) {
            if (e.hp.noise_std > result.best.noise_std ||
                (e.hp.noise_std == result.best.noise_std &&
                 e.hp.length_scale > result.best.length_scale)) {
              better = true;
            }
          }
          if (better) {
            result.best = e.hp;
            result.best_score = e.score;
            have_best = true;
          }
        }
        result.entries.push_back(std::move(e));
      }
    }
  }
  if (!have_best) {
    std::string detail;
    for (const auto& e : result.entries) {
      if (e.failed) detail += "\n  l=" + std::to_string(e.hp.length_scale) + ": " + e.error;
    }
    throw std::runtime_error("grid_search: all grid points failed to fit" + detail);
  }
  return result;
}

}  // namespace mvmf
