#include "lesionmetrics/detection.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "lesionmetrics/error.hpp"
#include "lesionmetrics/overlap_metrics.hpp"

namespace lesionmetrics {

MatchResult match_lesions(std::span<const LesionInstance> gt, std::span<const LesionInstance> pred,
                          double min_match_dice) {
  std::vector<MatchedPair> candidates;
  for (const auto& g : gt) {
    if (g.voxels.empty()) continue;
    for (const auto& p : pred) {
      if (p.voxels.empty()) continue;
      // Sorted voxel lists can only intersect if their index ranges do.
      if (p.voxels.front() > g.voxels.back() || g.voxels.front() > p.voxels.back()) continue;
      const std::size_t shared = intersection_size(g.voxels, p.voxels);
      if (shared == 0) continue;
      const double d = 2.0 * static_cast<double>(shared) / static_cast<double>(g.voxel_count() + p.voxel_count());
      if (d >= min_match_dice) candidates.push_back({g.id, p.id, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
    if (a.dice != b.dice) return a.dice > b.dice;
    if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
    return a.pred_id < b.pred_id;
  });

  MatchResult result;
  std::set<int> used_gt, used_pred;
  for (const auto& c : candidates) {
    if (used_gt.contains(c.gt_id) || used_pred.contains(c.pred_id)) continue;
    used_gt.insert(c.gt_id);
    used_pred.insert(c.pred_id);
    result.pairs.push_back(c);
  }
  for (const auto& g : gt)
    if (!used_gt.contains(g.id)) result.unmatched_gt.push_back(g.id);
  for (const auto& p : pred)
    if (!used_pred.contains(p.id)) result.unmatched_pred.push_back(p.id);
  return result;
}

DetectionCounts score_counts(long tp, long fp, long fn) {
  DetectionCounts c{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0)
    c.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  else
    c.precision = (tp + fn > 0) ? 0.0 : 1.0;
  c.sensitivity = (tp + fn > 0) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  const double sum = c.precision + c.sensitivity;
  c.f1 = sum > 0 ? 2.0 * c.precision * c.sensitivity / sum : 0.0;
  return c;
}

DetectionScores detection_scores(const MatchResult& match, const MorphometryTable& gt_morphometry,
                                 const MorphometryTable& pred_morphometry) {
  auto stratum_of = [](const MorphometryTable& table, int id, const char* side) {
    const auto it = table.find(id);
    if (it == table.end()) throw Error(std::string("missing morphometry for ") + side + " lesion " + std::to_string(id));
    return static_cast<int>(it->second.stratum);
  };
  std::array<long, 3> tp{}, fp{}, fn{};
  for (const auto& pair : match.pairs) {
    stratum_of(pred_morphometry, pair.pred_id, "predicted");
    ++tp[stratum_of(gt_morphometry, pair.gt_id, "ground-truth")];
  }
  for (int id : match.unmatched_gt) ++fn[stratum_of(gt_morphometry, id, "ground-truth")];
  for (int id : match.unmatched_pred) ++fp[stratum_of(pred_morphometry, id, "predicted")];

  DetectionScores scores;
  long all_tp = 0, all_fp = 0, all_fn = 0;
  for (int s = 0; s < 3; ++s) {
    scores.by_stratum[s] = score_counts(tp[s], fp[s], fn[s]);
    all_tp += tp[s];
    all_fp += fp[s];
    all_fn += fn[s];
  }
  scores.overall = score_counts(all_tp, all_fp, all_fn);
  return scores;
}

}  // namespace lesionmetrics
