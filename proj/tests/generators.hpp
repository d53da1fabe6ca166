#pragma once

// Hand-rolled random fixtures for the property and oracle tests.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lesionmetrics/rng.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace gen {

using lesionmetrics::GridGeometry;
using lesionmetrics::Index3;
using lesionmetrics::LabelVolume;
using lesionmetrics::Rng;
using lesionmetrics::VoxelIndex;

inline GridGeometry random_geometry(Rng& rng, int max_dim) {
  GridGeometry g;
  for (int a = 0; a < 3; ++a) {
    g.dims[a] = rng.uniform_int(1, max_dim);
    g.spacing[a] = 0.25 * static_cast<double>(rng.uniform_int(1, 12));
    g.origin[a] = rng.uniform(-50.0, 50.0);
  }
  return g;
}

/// Mixes sparse noise, filled boxes and thin rods so that components touch
/// through faces, edges and corners.
inline LabelVolume random_mask(Rng& rng, const GridGeometry& g) {
  LabelVolume v(g);
  auto voxels = v.voxels();
  const double noise = rng.uniform(0.0, 0.35);
  for (auto& x : voxels) x = rng.bernoulli(noise) ? 1 : 0;
  const int boxes = static_cast<int>(rng.uniform_int(0, 6));
  for (int b = 0; b < boxes; ++b) {
    Index3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      const auto p = rng.uniform_int(0, g.dims[a] - 1);
      const auto q = rng.uniform_int(0, g.dims[a] - 1);
      (a == 0 ? lo.i : a == 1 ? lo.j : lo.k) = std::min(p, q);
      (a == 0 ? hi.i : a == 1 ? hi.j : hi.k) = std::max(p, q);
    }
    const auto label = static_cast<lesionmetrics::Label>(rng.uniform_int(1, 3));
    for (auto k = lo.k; k <= hi.k; ++k)
      for (auto j = lo.j; j <= hi.j; ++j)
        for (auto i = lo.i; i <= hi.i; ++i) v.at({i, j, k}) = label;
  }
  return v;
}

/// Random sorted voxel set inside a sub-box of `g`.
inline std::vector<VoxelIndex> random_set(Rng& rng, const GridGeometry& g, double density) {
  std::vector<VoxelIndex> out;
  for (VoxelIndex v = 0; v < g.voxel_count(); ++v)
    if (rng.bernoulli(density)) out.push_back(v);
  return out;
}

inline std::vector<VoxelIndex> foreground(const LabelVolume& v) {
  std::vector<VoxelIndex> out;
  for (VoxelIndex n = 0; n < v.voxels().size(); ++n)
    if (v.voxels()[n] != 0) out.push_back(n);
  return out;
}

/// Blobby connected-ish point cloud: union of random ellipsoids.
inline std::vector<Index3> random_blob(Rng& rng, int extent) {
  std::vector<Index3> pts;
  const int parts = static_cast<int>(rng.uniform_int(1, 4));
  for (int p = 0; p < parts; ++p) {
    const double cx = rng.uniform(0, extent), cy = rng.uniform(0, extent), cz = rng.uniform(0, extent);
    const double rx = rng.uniform(0.5, extent / 2.0), ry = rng.uniform(0.5, extent / 2.0),
                 rz = rng.uniform(0.5, extent / 2.0);
    for (int k = 0; k <= extent; ++k)
      for (int j = 0; j <= extent; ++j)
        for (int i = 0; i <= extent; ++i) {
          const double x = (i - cx) / rx, y = (j - cy) / ry, z = (k - cz) / rz;
          if (x * x + y * y + z * z <= 1.0) pts.push_back({i, j, k});
        }
  }
  if (pts.empty()) pts.push_back({0, 0, 0});
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace gen
