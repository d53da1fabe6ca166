#pragma once

#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lesionmetrics/lesion_instance.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics {

/// Fleischner-style size classes driven by mean diameter:
/// micro < 3 mm, small in [3, 10] mm, significant > 10 mm.
enum class Stratum { micro = 0, small = 1, significant = 2 };

inline constexpr double kMicroUpperMm = 3.0;
inline constexpr double kSmallUpperMm = 10.0;

std::string_view to_string(Stratum stratum);
Stratum stratum_from_string(std::string_view name);

struct Morphometry {
  double volume_cc = 0.0;
  double long_axis_mm = 0.0;
  double short_axis_mm = 0.0;
  double mean_diameter_mm = 0.0;
  Stratum stratum = Stratum::micro;
};

using MorphometryTable = std::map<int, Morphometry>;

/// Diameters of a point set measured between voxel centres.
struct FeretDiameters {
  double long_axis_mm = 0.0;
  double short_axis_mm = 0.0;
  /// Endpoints of the realised long-axis chord, first < second. When several
  /// chords tie for longest the lexicographically smallest pair is used.
  std::pair<Index3, Index3> chord;
};

/// Long axis is the Feret diameter; short axis is the largest extent
/// orthogonal to the long-axis chord. Computed over convex hull vertices.
FeretDiameters feret_diameters(std::span<const Index3> points, const Vec3& spacing);

/// Measures one lesion from its boundary voxels. Throws Error when empty.
Morphometry measure_lesion(const LesionInstance& instance, const GridGeometry& geometry);

/// Measures every instance, keyed by instance id.
MorphometryTable measure_lesions(std::span<const LesionInstance> instances, const GridGeometry& geometry);

/// Throws Error for negative or non-finite input.
Stratum stratify(double mean_diameter_mm);

}  // namespace lesionmetrics
