#pragma once

#include <span>
#include <vector>

#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

// A boundary voxel is a member voxel with at least one 6-neighbour outside
// the set, or one lying on the grid edge.

/// Boundary voxels of a sorted voxel set, in ascending linear order.
std::vector<Index3> boundary_voxels(std::span<const VoxelIndex> voxels, const GridGeometry& geometry);

/// Boundary voxels of the foreground (label != 0) of a whole volume.
std::vector<Index3> boundary_voxels(const LabelVolume& mask);

/// Squared physical distance between two voxel centres. Every distance in
/// the library goes through this function so that accelerated and
/// exhaustive paths agree bit for bit.
inline double squared_distance_mm(const Index3& a, const Index3& b, const Vec3& spacing) {
  const double dx = static_cast<double>(a.i - b.i) * spacing[0];
  const double dy = static_cast<double>(a.j - b.j) * spacing[1];
  const double dz = static_cast<double>(a.k - b.k) * spacing[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace lesionmetrics
