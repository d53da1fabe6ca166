#include "lesionmetrics/instance_extraction.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lesionmetrics/error.hpp"

namespace lesionmetrics {
namespace {

struct Run {
  std::int64_t x0, x1;  // inclusive
  std::int64_t j, k;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

// A neighbouring row (dy, dz) already scanned, and how far runs may be offset
// along x and still touch under the given connectivity.
struct RowOffset {
  std::int64_t dy, dz, x_slack;
};

std::vector<RowOffset> backward_rows(Connectivity c) {
  switch (c) {
    case Connectivity::six: return {{-1, 0, 0}, {0, -1, 0}};
    case Connectivity::eighteen: return {{-1, 0, 1}, {0, -1, 1}, {-1, -1, 0}, {1, -1, 0}};
    case Connectivity::twenty_six: return {{-1, 0, 1}, {0, -1, 1}, {-1, -1, 1}, {1, -1, 1}};
  }
  return {};
}

}  // namespace

Connectivity connectivity_from_int(int value) {
  switch (value) {
    case 6: return Connectivity::six;
    case 18: return Connectivity::eighteen;
    case 26: return Connectivity::twenty_six;
    default: throw Error("connectivity must be 6, 18 or 26 (got " + std::to_string(value) + ")");
  }
}

std::vector<LesionInstance> extract_instances(const LabelVolume& mask, Connectivity connectivity,
                                              MaskSource source) {
  const GridGeometry& g = mask.geometry();
  const auto [nx, ny, nz] = g.dims;
  const auto voxels = mask.voxels();

  std::vector<Run> runs;
  std::vector<std::size_t> row_start(static_cast<std::size_t>(ny * nz) + 1, 0);
  for (std::int64_t k = 0; k < nz; ++k) {
    for (std::int64_t j = 0; j < ny; ++j) {
      const std::size_t row = static_cast<std::size_t>(j + ny * k);
      row_start[row] = runs.size();
      const Label* line = voxels.data() + row * static_cast<std::size_t>(nx);
      for (std::int64_t i = 0; i < nx;) {
        if (line[i] == 0) {
          ++i;
          continue;
        }
        const std::int64_t start = i;
        while (i < nx && line[i] != 0) ++i;
        runs.push_back({start, i - 1, j, k});
      }
    }
  }
  row_start.back() = runs.size();
  if (runs.empty()) return {};

  DisjointSets sets(runs.size());
  const auto offsets = backward_rows(connectivity);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    for (const RowOffset& off : offsets) {
      const std::int64_t j = run.j + off.dy, k = run.k + off.dz;
      if (j < 0 || j >= ny || k < 0) continue;
      const auto row = static_cast<std::size_t>(j + ny * k);
      for (std::size_t s = row_start[row]; s < row_start[row + 1]; ++s) {
        const Run& other = runs[s];
        if (other.x0 > run.x1 + off.x_slack) break;
        if (other.x1 + off.x_slack >= run.x0) sets.unite(r, s);
      }
    }
  }

  // Runs are in linear order, so appending keeps each voxel list sorted.
  std::vector<std::size_t> component_of(runs.size());
  std::vector<std::size_t> root_to_component(runs.size(), SIZE_MAX);
  std::vector<LesionInstance> components;
  std::vector<Index3> first_voxel;
  std::vector<Vec3> sums;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::size_t root = sets.find(r);
    if (root_to_component[root] == SIZE_MAX) {
      root_to_component[root] = components.size();
      components.emplace_back();
      components.back().source = source;
      first_voxel.push_back({runs[r].x0, runs[r].j, runs[r].k});
      sums.push_back({0.0, 0.0, 0.0});
    }
    const std::size_t c = root_to_component[root];
    const Run& run = runs[r];
    auto& list = components[c].voxels;
    const VoxelIndex base = g.linear({0, run.j, run.k});
    for (std::int64_t i = run.x0; i <= run.x1; ++i) list.push_back(base + static_cast<VoxelIndex>(i));
    const auto len = static_cast<double>(run.x1 - run.x0 + 1);
    sums[c][0] += len * 0.5 * static_cast<double>(run.x0 + run.x1);
    sums[c][1] += len * static_cast<double>(run.j);
    sums[c][2] += len * static_cast<double>(run.k);
    first_voxel[c] = std::min(first_voxel[c], Index3{run.x0, run.j, run.k});
  }

  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto n = static_cast<double>(components[c].voxels.size());
    for (int axis = 0; axis < 3; ++axis)
      components[c].centroid_mm[axis] = g.origin[axis] + g.spacing[axis] * sums[c][axis] / n;
  }

  std::vector<std::size_t> order(components.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto na = components[a].voxels.size(), nb = components[b].voxels.size();
    if (na != nb) return na > nb;
    return first_voxel[a] < first_voxel[b];
  });
  std::vector<LesionInstance> out;
  out.reserve(components.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out.push_back(std::move(components[order[rank]]));
    out.back().id = static_cast<int>(rank + 1);
  }
  return out;
}

MicroNoduleSplit filter_micro_nodules(std::vector<LesionInstance> instances, const MorphometryTable& morphometry,
                                      double threshold_mm) {
  MicroNoduleSplit split;
  for (auto& inst : instances) {
    const auto it = morphometry.find(inst.id);
    if (it == morphometry.end()) throw Error("missing morphometry for lesion " + std::to_string(inst.id));
    if (it->second.mean_diameter_mm < threshold_mm)
      split.excluded.push_back(std::move(inst));
    else
      split.kept.push_back(std::move(inst));
  }
  return split;
}

std::vector<LesionInstance> remove_satellite_clusters(std::vector<LesionInstance> instances, std::size_t min_voxels) {
  std::erase_if(instances, [min_voxels](const LesionInstance& inst) { return inst.voxel_count() < min_voxels; });
  return instances;
}

LabelVolume repair_split_lesions(const LabelVolume& mask, int max_z_gap) {
  LabelVolume out = mask;
  if (max_z_gap <= 0) return out;
  const auto [nx, ny, nz] = mask.geometry().dims;
  const auto plane = static_cast<std::size_t>(nx * ny);
  const auto src = mask.voxels();
  auto dst = out.voxels();
  for (std::size_t col = 0; col < plane; ++col) {
    std::int64_t last_fg = -1;
    for (std::int64_t k = 0; k < nz; ++k) {
      const Label v = src[col + static_cast<std::size_t>(k) * plane];
      if (v == 0) continue;
      const std::int64_t gap = k - last_fg - 1;
      if (last_fg >= 0 && gap > 0 && gap <= max_z_gap) {
        const Label fill = src[col + static_cast<std::size_t>(last_fg) * plane];
        for (std::int64_t z = last_fg + 1; z < k; ++z) dst[col + static_cast<std::size_t>(z) * plane] = fill;
      }
      last_fg = k;
    }
  }
  return out;
}

}  // namespace lesionmetrics
