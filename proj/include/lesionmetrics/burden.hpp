#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lesionmetrics/lesion_instance.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

struct StudyBurden {
  std::string patient_id;
  int study_order = 0;
  double burden_cc = 0.0;
  std::size_t lesion_count = 0;
  std::map<std::string, double> per_region_cc;
};

/// Total lesion volume: (sum of voxel counts) x voxel volume.
StudyBurden study_burden(std::span<const LesionInstance> instances, const GridGeometry& geometry);

/// Lesion cc falling inside each region mask (nonzero voxels). A lesion that
/// straddles regions contributes voxel by voxel to each of them.
std::map<std::string, double> region_burden(std::span<const LesionInstance> instances,
                                            const std::map<std::string, LabelVolume>& regions,
                                            const GridGeometry& geometry);

struct TrajectoryPoint {
  int study_order = 0;
  double gt_burden_cc = 0.0;
  double pred_burden_cc = 0.0;
  double signed_diff_cc = 0.0;  // pred - gt
};

struct PatientTrajectory {
  std::string patient_id;
  std::vector<TrajectoryPoint> visits;  // strictly increasing study_order
  std::vector<double> gt_deltas_cc;     // visits[i+1] - visits[i]
  std::vector<double> pred_deltas_cc;
};

/// Orders one patient's (ground truth, prediction) burdens by study_order.
/// Throws Error on empty input, duplicate study_order or mixed patient ids.
PatientTrajectory build_trajectory(std::vector<std::pair<StudyBurden, StudyBurden>> studies);

}  // namespace lesionmetrics
