#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lesionmetrics/morphometry.hpp"
#include "lesionmetrics/volume_io.hpp"

namespace lesionmetrics::phantom {

struct Sphere {
  Vec3 center_mm{0.0, 0.0, 0.0};
  double radius_mm = 1.0;
};

struct LesionResize {
  int lesion_id = 0;
  int steps = 0;  // > 0 dilates, < 0 erodes (6-neighbourhood per step)
};

struct Perturbation {
  std::vector<LesionResize> resize;
  std::vector<int> drop;
  std::vector<Sphere> spurious;
  std::vector<std::int64_t> blank_slices;  // z indices

  bool empty() const { return resize.empty() && drop.empty() && spurious.empty() && blank_slices.empty(); }
};

/// Lesion ids are 1-based positions in `lesions`; the generated label of a
/// lesion voxel equals its id.
struct PhantomSpec {
  GridGeometry geometry;
  std::vector<Sphere> lesions;
  std::uint64_t seed = 0;
  std::optional<Perturbation> perturbation;
};

struct ExpectedLesion {
  int id = 0;
  double volume_cc = 0.0;    // 4/3 pi r^3
  double diameter_mm = 0.0;  // 2r
  Stratum stratum = Stratum::micro;
};

struct GeneratedPhantom {
  LabelVolume gt;
  std::vector<ExpectedLesion> expected;
};

struct ExpectedMatch {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct PerturbedPhantom {
  LabelVolume pred;
  ExpectedMatch expected;
};

/// Throws Error if a sphere is invalid, leaves the grid, or lies within
/// r_i + r_j + 2 * max spacing of another.
void validate(const PhantomSpec& spec);

/// Voxel belongs to a lesion iff its centre lies within the radius.
GeneratedPhantom generate(const PhantomSpec& spec);

/// Applies the spec's perturbation to `gt` (identity when absent). The
/// expected counts assume no repair and no size filtering: every dropped or
/// eroded-away lesion is a FN, every spurious blob a FP, and each extra piece
/// a blanked slice cuts from a lesion is one more FP.
PerturbedPhantom perturb(const LabelVolume& gt, const PhantomSpec& spec);

/// Appends `count` non-overlapping spheres with radii uniform in
/// [min_radius_mm, max_radius_mm], drawn from Rng(spec.seed).
void place_random_lesions(PhantomSpec& spec, int count, double min_radius_mm, double max_radius_mm);

PhantomSpec spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const PhantomSpec& spec);

}  // namespace lesionmetrics::phantom
