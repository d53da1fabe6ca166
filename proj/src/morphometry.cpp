#include "lesionmetrics/morphometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lesionmetrics/convex_hull.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/surface.hpp"

namespace lesionmetrics {

std::string_view to_string(Stratum stratum) {
  switch (stratum) {
    case Stratum::micro: return "micro";
    case Stratum::small: return "small";
    case Stratum::significant: return "significant";
  }
  return "unknown";
}

Stratum stratum_from_string(std::string_view name) {
  if (name == "micro") return Stratum::micro;
  if (name == "small") return Stratum::small;
  if (name == "significant") return Stratum::significant;
  throw Error("unknown stratum '" + std::string(name) + "'");
}

Stratum stratify(double mean_diameter_mm) {
  if (!(mean_diameter_mm >= 0) || !std::isfinite(mean_diameter_mm))
    throw Error("mean diameter must be a non-negative number");
  if (mean_diameter_mm < kMicroUpperMm) return Stratum::micro;
  if (mean_diameter_mm <= kSmallUpperMm) return Stratum::small;
  return Stratum::significant;
}

FeretDiameters feret_diameters(std::span<const Index3> points, const Vec3& spacing) {
  if (points.empty()) throw Error("cannot measure an empty point set");
  const std::vector<Index3> hull = convex_hull_vertices(points);

  FeretDiameters out;
  out.chord = {hull.front(), hull.front()};
  double best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a) {
    for (std::size_t b = a + 1; b < hull.size(); ++b) {
      const double d2 = squared_distance_mm(hull[a], hull[b], spacing);
      if (d2 > best) {
        best = d2;
        out.chord = {hull[a], hull[b]};
      }
    }
  }
  out.long_axis_mm = std::sqrt(best);
  if (best == 0.0) return out;

  const Vec3 u{static_cast<double>(out.chord.second.i - out.chord.first.i) * spacing[0],
               static_cast<double>(out.chord.second.j - out.chord.first.j) * spacing[1],
               static_cast<double>(out.chord.second.k - out.chord.first.k) * spacing[2]};
  double short_best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a) {
    for (std::size_t b = a + 1; b < hull.size(); ++b) {
      const Vec3 w{static_cast<double>(hull[a].i - hull[b].i) * spacing[0],
                   static_cast<double>(hull[a].j - hull[b].j) * spacing[1],
                   static_cast<double>(hull[a].k - hull[b].k) * spacing[2]};
      const double along = w[0] * u[0] + w[1] * u[1] + w[2] * u[2];
      const double d2 = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) - along * along / best;
      short_best = std::max(short_best, d2);
    }
  }
  out.short_axis_mm = std::sqrt(short_best);
  return out;
}

Morphometry measure_lesion(const LesionInstance& instance, const GridGeometry& geometry) {
  if (instance.voxels.empty()) throw Error("cannot measure empty lesion " + std::to_string(instance.id));
  const auto boundary = boundary_voxels(instance.voxels, geometry);
  const FeretDiameters diameters = feret_diameters(boundary, geometry.spacing);

  Morphometry m;
  m.volume_cc = static_cast<double>(instance.voxel_count()) * voxel_volume_cc(geometry);
  m.long_axis_mm = diameters.long_axis_mm;
  m.short_axis_mm = diameters.short_axis_mm;
  m.mean_diameter_mm = 0.5 * (m.long_axis_mm + m.short_axis_mm);
  m.stratum = stratify(m.mean_diameter_mm);
  return m;
}

MorphometryTable measure_lesions(std::span<const LesionInstance> instances, const GridGeometry& geometry) {
  MorphometryTable table;
  for (const auto& inst : instances) table.emplace(inst.id, measure_lesion(inst, geometry));
  return table;
}

}  // namespace lesionmetrics
