#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lesionmetrics {

using Label = std::uint16_t;

/// Linear voxel index, x fastest: i + nx * (j + ny * k).
using VoxelIndex = std::uint64_t;

struct Index3 {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  auto operator<=>(const Index3&) const = default;
};

using Vec3 = std::array<double, 3>;

/// Axis-aligned voxel grid. Physical position of voxel (i,j,k) is
/// origin + (i,j,k) * spacing, per axis.
struct GridGeometry {
  std::array<std::int64_t, 3> dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  VoxelIndex linear(const Index3& p) const {
    return static_cast<VoxelIndex>(p.i + dims[0] * (p.j + dims[1] * p.k));
  }
  Index3 unravel(VoxelIndex v) const {
    const auto n = static_cast<std::int64_t>(v);
    return {n % dims[0], (n / dims[0]) % dims[1], n / (dims[0] * dims[1])};
  }
  bool contains(const Index3& p) const {
    return p.i >= 0 && p.j >= 0 && p.k >= 0 && p.i < dims[0] && p.j < dims[1] && p.k < dims[2];
  }
  Vec3 position_mm(const Index3& p) const {
    return {origin[0] + static_cast<double>(p.i) * spacing[0],
            origin[1] + static_cast<double>(p.j) * spacing[1],
            origin[2] + static_cast<double>(p.k) * spacing[2]};
  }

  /// Throws Error unless all dims >= 1 and all spacings are finite and > 0.
  void validate() const;

  bool operator==(const GridGeometry&) const = default;
};

/// Dense 3D label grid; 0 is background. Voxels are stored x fastest, the
/// order NIfTI uses on disk.
class LabelVolume {
 public:
  LabelVolume() = default;
  explicit LabelVolume(GridGeometry geometry);
  LabelVolume(GridGeometry geometry, std::vector<Label> voxels);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const Label> voxels() const { return voxels_; }
  std::span<Label> voxels() { return voxels_; }

  Label at(const Index3& p) const { return voxels_[geometry_.linear(p)]; }
  Label& at(const Index3& p) { return voxels_[geometry_.linear(p)]; }

  std::size_t foreground_count() const;

  bool operator==(const LabelVolume&) const = default;

 private:
  GridGeometry geometry_;
  std::vector<Label> voxels_ = std::vector<Label>(1, 0);
};

/// Reads a NIfTI-1 label image (.nii or .nii.gz; compression is detected
/// from the stream, not the extension). Accepted datatypes: uint8, int16,
/// uint16, int32, float32. Float voxels are rounded to the nearest integer.
LabelVolume load_label_volume(const std::filesystem::path& path);

/// Writes a NIfTI-1 single-file image. A ".gz" extension gzips the output.
/// The datatype is uint8 when every label fits, uint16 otherwise.
void save_label_volume(const LabelVolume& volume, const std::filesystem::path& path);

/// Throws Error naming the offending axis unless dims match exactly and
/// spacing/origin agree within `rel_tol`.
void assert_same_grid(const LabelVolume& a, const LabelVolume& b, double rel_tol = 1e-3);
void assert_same_grid(const GridGeometry& a, const GridGeometry& b, double rel_tol = 1e-3);

/// Volume of one voxel in cc (cm^3).
double voxel_volume_cc(const GridGeometry& geometry);

}  // namespace lesionmetrics
