#include "lesionmetrics/burden.hpp"

#include <algorithm>
#include <string>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics {

StudyBurden study_burden(std::span<const LesionInstance> instances, const GridGeometry& geometry) {
  std::size_t voxels = 0;
  for (const auto& inst : instances) voxels += inst.voxel_count();
  StudyBurden b;
  b.burden_cc = static_cast<double>(voxels) * voxel_volume_cc(geometry);
  b.lesion_count = instances.size();
  return b;
}

std::map<std::string, double> region_burden(std::span<const LesionInstance> instances,
                                            const std::map<std::string, LabelVolume>& regions,
                                            const GridGeometry& geometry) {
  const double cc = voxel_volume_cc(geometry);
  std::map<std::string, double> out;
  for (const auto& [name, region] : regions) {
    try {
      assert_same_grid(region.geometry(), geometry);
    } catch (const Error& e) {
      throw Error("region '" + name + "': " + e.what());
    }
    const auto mask = region.voxels();
    std::size_t inside = 0;
    for (const auto& inst : instances)
      for (VoxelIndex v : inst.voxels) inside += mask[v] != 0;
    out[name] = static_cast<double>(inside) * cc;
  }
  return out;
}

PatientTrajectory build_trajectory(std::vector<std::pair<StudyBurden, StudyBurden>> studies) {
  if (studies.empty()) throw Error("trajectory needs at least one study");
  PatientTrajectory t;
  t.patient_id = studies.front().first.patient_id;
  for (const auto& [gt, pred] : studies)
    if (gt.patient_id != t.patient_id || pred.patient_id != t.patient_id)
      throw Error("mixed patient ids in trajectory: '" + t.patient_id + "' and '" +
                  (gt.patient_id != t.patient_id ? gt.patient_id : pred.patient_id) + "'");
  for (const auto& [gt, pred] : studies)
    if (gt.study_order != pred.study_order) throw Error("ground truth and prediction study_order differ");
  std::sort(studies.begin(), studies.end(),
            [](const auto& a, const auto& b) { return a.first.study_order < b.first.study_order; });
  for (std::size_t n = 1; n < studies.size(); ++n)
    if (studies[n].first.study_order == studies[n - 1].first.study_order)
      throw Error("duplicate study_order " + std::to_string(studies[n].first.study_order) + " for patient '" +
                  t.patient_id + "'");

  for (const auto& [gt, pred] : studies)
    t.visits.push_back({gt.study_order, gt.burden_cc, pred.burden_cc, pred.burden_cc - gt.burden_cc});
  for (std::size_t n = 1; n < t.visits.size(); ++n) {
    t.gt_deltas_cc.push_back(t.visits[n].gt_burden_cc - t.visits[n - 1].gt_burden_cc);
    t.pred_deltas_cc.push_back(t.visits[n].pred_burden_cc - t.visits[n - 1].pred_burden_cc);
  }
  return t;
}

}  // namespace lesionmetrics
