#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lesionmetrics/lesion_instance.hpp"
#include "lesionmetrics/morphometry.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

enum class Connectivity { six = 6, eighteen = 18, twenty_six = 26 };

/// Throws Error unless value is 6, 18 or 26.
Connectivity connectivity_from_int(int value);

/// Splits the foreground (any nonzero label) into maximal connected
/// components. Ids run 1..n in descending voxel count; ties go to the
/// component whose smallest voxel (i, j, k) compares lexicographically first.
std::vector<LesionInstance> extract_instances(const LabelVolume& mask,
                                              Connectivity connectivity = Connectivity::twenty_six,
                                              MaskSource source = MaskSource::ground_truth);

struct MicroNoduleSplit {
  std::vector<LesionInstance> kept;
  std::vector<LesionInstance> excluded;
};

/// Excludes lesions whose mean diameter is strictly below `threshold_mm`.
/// Throws Error if an instance has no entry in `morphometry`.
MicroNoduleSplit filter_micro_nodules(std::vector<LesionInstance> instances,
                                      const MorphometryTable& morphometry,
                                      double threshold_mm = kMicroUpperMm);

/// Drops instances with fewer than `min_voxels` voxels.
std::vector<LesionInstance> remove_satellite_clusters(std::vector<LesionInstance> instances,
                                                      std::size_t min_voxels = 2);

/// Fills background runs of at most `max_z_gap` slices along z that are
/// bounded above and below by foreground in the same (x, y) column. Filled
/// voxels take the label of the voxel below the gap. max_z_gap = 0 is a no-op.
LabelVolume repair_split_lesions(const LabelVolume& mask, int max_z_gap = 1);

}  // namespace lesionmetrics
