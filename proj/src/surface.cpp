#include "lesionmetrics/surface.hpp"

#include <algorithm>
#include <limits>

namespace lesionmetrics {

std::vector<Index3> boundary_voxels(std::span<const VoxelIndex> voxels, const GridGeometry& geometry) {
  std::vector<Index3> out;
  if (voxels.empty()) return out;

  std::vector<Index3> points;
  points.reserve(voxels.size());
  Index3 lo{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
            std::numeric_limits<std::int64_t>::max()};
  Index3 hi{-1, -1, -1};
  for (VoxelIndex v : voxels) {
    const Index3 p = geometry.unravel(v);
    points.push_back(p);
    lo = {std::min(lo.i, p.i), std::min(lo.j, p.j), std::min(lo.k, p.k)};
    hi = {std::max(hi.i, p.i), std::max(hi.j, p.j), std::max(hi.k, p.k)};
  }

  // Occupancy over the bounding box padded by one voxel on every side.
  const std::int64_t bx = hi.i - lo.i + 3;
  const std::int64_t by = hi.j - lo.j + 3;
  const std::int64_t bz = hi.k - lo.k + 3;
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(bx * by * bz), 0);
  auto local = [&](const Index3& p) {
    return static_cast<std::size_t>((p.i - lo.i + 1) + bx * ((p.j - lo.j + 1) + by * (p.k - lo.k + 1)));
  };
  for (const Index3& p : points) occupied[local(p)] = 1;

  const auto& d = geometry.dims;
  const std::size_t sx = 1, sy = static_cast<std::size_t>(bx), sz = static_cast<std::size_t>(bx * by);
  for (const Index3& p : points) {
    const bool edge = p.i == 0 || p.j == 0 || p.k == 0 || p.i == d[0] - 1 || p.j == d[1] - 1 || p.k == d[2] - 1;
    const std::size_t n = local(p);
    if (edge || !occupied[n - sx] || !occupied[n + sx] || !occupied[n - sy] || !occupied[n + sy] ||
        !occupied[n - sz] || !occupied[n + sz])
      out.push_back(p);
  }
  return out;
}

std::vector<Index3> boundary_voxels(const LabelVolume& mask) {
  std::vector<Index3> out;
  const auto& d = mask.geometry().dims;
  const auto v = mask.voxels();
  const std::size_t sy = static_cast<std::size_t>(d[0]);
  const std::size_t sz = static_cast<std::size_t>(d[0] * d[1]);
  std::size_t n = 0;
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i, ++n) {
        if (v[n] == 0) continue;
        const bool edge = i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1;
        if (edge || v[n - 1] == 0 || v[n + 1] == 0 || v[n - sy] == 0 || v[n + sy] == 0 || v[n - sz] == 0 ||
            v[n + sz] == 0)
          out.push_back({i, j, k});
      }
    }
  }
  return out;
}

}  // namespace lesionmetrics
