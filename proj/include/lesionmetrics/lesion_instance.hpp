#pragma once

#include <cstddef>
#include <vector>

#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

enum class MaskSource { ground_truth, predicted };

/// One connected lesion. `voxels` holds linear indices in ascending order.
struct LesionInstance {
  int id = 0;
  std::vector<VoxelIndex> voxels;
  Vec3 centroid_mm{0.0, 0.0, 0.0};
  MaskSource source = MaskSource::ground_truth;

  std::size_t voxel_count() const { return voxels.size(); }
};

}  // namespace lesionmetrics
