#pragma once

#include <span>
#include <vector>

#include "lesionmetrics/detection.hpp"
#include "lesionmetrics/lesion_instance.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

struct OverlapScores {
  double dice = 0.0;
  double hausdorff_mm = 0.0;
};

/// Number of shared voxels of two sorted voxel sets.
std::size_t intersection_size(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b);

/// 2|A n B| / (|A| + |B|) over sorted voxel sets; 1.0 when both are empty.
double dice(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b);

/// Dice of the two foregrounds. Grids must match.
double dice(const LabelVolume& a, const LabelVolume& b);

/// Symmetric Hausdorff distance in mm between boundary voxel centres.
/// Throws Error ("undefined HD") if either set is empty.
double hausdorff(std::span<const VoxelIndex> a, std::span<const VoxelIndex> b, const GridGeometry& geometry);
double hausdorff(const LabelVolume& a, const LabelVolume& b);

/// Symmetric Hausdorff distance between two point sets (already reduced to
/// boundary voxels), using a k-d tree with early termination.
double hausdorff_points(std::span<const Index3> a, std::span<const Index3> b, const Vec3& spacing);

struct PairScores {
  int gt_id = 0;
  int pred_id = 0;
  OverlapScores scores;
};

/// Dice and HD for every matched pair, computed on the pair's own voxels.
std::vector<PairScores> per_pair_scores(const MatchResult& matches,
                                        std::span<const LesionInstance> gt,
                                        std::span<const LesionInstance> pred,
                                        const GridGeometry& geometry);

}  // namespace lesionmetrics
