#pragma once

// Hit extraction from per-frame (no hit, near hit, far hit) confidences, the
// two non-learned baselines, and hit-level evaluation metrics.

#include <optional>
#include <vector>

#include "shuttle3d/geometry.hpp"
#include "shuttle3d/reconstruction.hpp"

namespace shuttle3d::hits {

using geometry::Player;

struct FrameScores {
  double no_hit = 0.0;
  double near = 0.0;
  double far = 0.0;
};

struct ScoreSequence {
  double fps = 30.0;
  /// Frame number of scores[0]; frames are consecutive.
  int first_frame = 0;
  std::vector<FrameScores> scores;

  /// Throws InvalidInput for fps <= 0, an empty sequence or negative scores.
  void validate() const;
  std::size_t size() const { return scores.size(); }
};

struct Hit {
  int frame = 0;
  Player player = Player::near;

  friend bool operator==(const Hit&, const Hit&) = default;
};

using HitList = std::vector<Hit>;

/// Minimum frame distance between consecutive hits: ceil(fps / 2).
int min_hit_spacing(double fps);
/// Hit budget for a rally of F frames: ceil(F / fps).
int hit_budget(std::size_t frames, double fps);

/// Mean of (near + far) / 2 over all frames.
double tau(const ScoreSequence& scores);

/// Sum over hits of (score of the hitting player - tau).
double hit_objective(const ScoreSequence& scores, const HitList& hits, double tau_value);

/// Budget, spacing and alternation all hold.
bool satisfies_constraints(const ScoreSequence& scores, const HitList& hits);

struct OptimizedHits {
  HitList hits;
  double objective = 0.0;
};

/// Globally optimal hit set under the budget, spacing and alternation
/// constraints. Ties prefer fewer hits, then earlier frames, then the near
/// player.
OptimizedHits optimize_hits(const ScoreSequence& scores);

/// Per-frame argmax; a hit within min_hit_spacing of the previously kept hit
/// is dropped. Alternation is not enforced.
HitList naive_postprocess(const ScoreSequence& scores);

/// Second-difference detector on the 2D track. Hits are local maxima of
/// max(|u''|, |v''|) above `threshold` (px / frame^2) inside runs of visible
/// frames, thinned by min_hit_spacing. With a homography the player is the
/// court side of the shuttle's ground-plane image, otherwise unknown.
HitList derivative_baseline(const recon::ShuttleTrack& track, double threshold,
                            const std::optional<geometry::Homography>& homography = std::nullopt);

struct HitMetrics {
  std::size_t matched = 0;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// One-to-one greedy matching in increasing frame order with equal player
/// and |frame difference| <= tolerance_frames.
HitMetrics hit_metrics(const HitList& truth, const HitList& predicted, int tolerance_frames = 0);

struct LabeledTrack {
  recon::ShuttleTrack track;
  HitList truth;
};

struct ThresholdTuning {
  double threshold = 0.0;
  double mean_accuracy = 0.0;
};

/// Picks the candidate threshold with the highest mean accuracy (first one on
/// ties). Player attribution is ignored when no homography is given.
ThresholdTuning tune_derivative_threshold(
    const std::vector<LabeledTrack>& labeled, const std::vector<double>& candidates,
    int tolerance_frames = 0,
    const std::optional<geometry::Homography>& homography = std::nullopt);

}  // namespace shuttle3d::hits
