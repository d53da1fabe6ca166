#pragma once

#include <array>
#include <span>
#include <vector>

#include "lesionmetrics/lesion_instance.hpp"
#include "lesionmetrics/morphometry.hpp"

namespace lesionmetrics {

struct MatchedPair {
  int gt_id = 0;
  int pred_id = 0;
  double dice = 0.0;
};

/// One-to-one pairing of ground-truth and predicted lesions.
struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<int> unmatched_gt;    // false negatives
  std::vector<int> unmatched_pred;  // false positives
};

/// Candidates are all (gt, pred) pairs sharing at least one voxel with Dice
/// >= min_match_dice. They are taken greedily by descending Dice (ties by
/// smaller gt id, then smaller pred id) while both sides are still free.
MatchResult match_lesions(std::span<const LesionInstance> gt,
                          std::span<const LesionInstance> pred,
                          double min_match_dice = 0.0);

struct DetectionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double f1 = 0.0;
};

/// Fills precision/sensitivity/F1 from the counts. Empty denominators:
/// precision is 0 if the stratum has ground truth (tp + fn > 0) and 1
/// otherwise; sensitivity is 1; F1 is 0 when P + S = 0.
DetectionCounts score_counts(long tp, long fp, long fn);

struct DetectionScores {
  DetectionCounts overall;
  std::array<DetectionCounts, 3> by_stratum;  // indexed by Stratum

  const DetectionCounts& stratum(Stratum s) const { return by_stratum[static_cast<int>(s)]; }
};

/// TP and FN take the ground-truth lesion's stratum, FP the predicted one's.
DetectionScores detection_scores(const MatchResult& match,
                                 const MorphometryTable& gt_morphometry,
                                 const MorphometryTable& pred_morphometry);

}  // namespace lesionmetrics
