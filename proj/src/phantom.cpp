#include "lesionmetrics/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "lesionmetrics/error.hpp"
#include "lesionmetrics/rng.hpp"

namespace lesionmetrics::phantom {
namespace {

constexpr int kMaxPlacementAttempts = 100000;

double max_spacing(const GridGeometry& g) { return std::max({g.spacing[0], g.spacing[1], g.spacing[2]}); }

void check_sphere(const Sphere& s, const GridGeometry& g, const std::string& what) {
  if (!(s.radius_mm > 0) || !std::isfinite(s.radius_mm)) throw Error(what + ": radius must be positive");
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = g.origin[axis];
    const double hi = g.origin[axis] + static_cast<double>(g.dims[axis] - 1) * g.spacing[axis];
    if (!std::isfinite(s.center_mm[axis]) || s.center_mm[axis] - s.radius_mm < lo ||
        s.center_mm[axis] + s.radius_mm > hi)
      throw Error(what + " escapes the grid bounds");
  }
}

bool too_close(const Sphere& a, const Sphere& b, double gap) {
  double d2 = 0.0;
  for (int axis = 0; axis < 3; ++axis) d2 += (a.center_mm[axis] - b.center_mm[axis]) * (a.center_mm[axis] - b.center_mm[axis]);
  return std::sqrt(d2) <= a.radius_mm + b.radius_mm + gap;
}

void check_separation(const std::vector<Sphere>& spheres, const GridGeometry& g) {
  const double gap = 2.0 * max_spacing(g);
  for (std::size_t a = 0; a < spheres.size(); ++a)
    for (std::size_t b = a + 1; b < spheres.size(); ++b)
      if (too_close(spheres[a], spheres[b], gap))
        throw Error("overlapping lesions " + std::to_string(a + 1) + " and " + std::to_string(b + 1));
}

// Paints voxels whose centre lies within the sphere. Only background voxels
// are written when `only_background` is set.
void paint_sphere(LabelVolume& volume, const Sphere& s, Label label, bool only_background) {
  const GridGeometry& g = volume.geometry();
  std::array<std::int64_t, 3> lo{}, hi{};
  for (int axis = 0; axis < 3; ++axis) {
    lo[axis] = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil((s.center_mm[axis] - s.radius_mm - g.origin[axis]) / g.spacing[axis])));
    hi[axis] = std::min<std::int64_t>(
        g.dims[axis] - 1,
        static_cast<std::int64_t>(std::floor((s.center_mm[axis] + s.radius_mm - g.origin[axis]) / g.spacing[axis])));
  }
  const double r2 = s.radius_mm * s.radius_mm;
  for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
    for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
      for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
        const Vec3 p = g.position_mm({i, j, k});
        const double d2 = (p[0] - s.center_mm[0]) * (p[0] - s.center_mm[0]) +
                          (p[1] - s.center_mm[1]) * (p[1] - s.center_mm[1]) +
                          (p[2] - s.center_mm[2]) * (p[2] - s.center_mm[2]);
        if (d2 > r2) continue;
        Label& v = volume.at({i, j, k});
        if (!only_background || v == 0) v = label;
      }
}

std::vector<VoxelIndex> voxels_with_label(const LabelVolume& volume, Label label) {
  std::vector<VoxelIndex> out;
  const auto v = volume.voxels();
  for (std::size_t n = 0; n < v.size(); ++n)
    if (v[n] == label) out.push_back(n);
  return out;
}

template <typename Fn>
void for_each_face_neighbour(const GridGeometry& g, VoxelIndex v, Fn&& fn) {
  const Index3 p = g.unravel(v);
  const Index3 nbrs[6] = {{p.i - 1, p.j, p.k}, {p.i + 1, p.j, p.k}, {p.i, p.j - 1, p.k},
                          {p.i, p.j + 1, p.k}, {p.i, p.j, p.k - 1}, {p.i, p.j, p.k + 1}};
  for (const Index3& q : nbrs) fn(q);
}

void resize_label(LabelVolume& volume, Label label, int steps) {
  const GridGeometry& g = volume.geometry();
  std::vector<VoxelIndex> members = voxels_with_label(volume, label);
  auto data = volume.voxels();
  for (int step = 0; step < std::abs(steps); ++step) {
    std::vector<VoxelIndex> changed;
    for (VoxelIndex v : members) {
      bool exposed = false;
      for_each_face_neighbour(g, v, [&](const Index3& q) {
        if (!g.contains(q)) {
          exposed = true;
          return;
        }
        const VoxelIndex n = g.linear(q);
        if (steps > 0 && data[n] == 0) changed.push_back(n);
        if (data[n] != label) exposed = true;
      });
      if (steps < 0 && exposed) changed.push_back(v);
    }
    std::sort(changed.begin(), changed.end());
    changed.erase(std::unique(changed.begin(), changed.end()), changed.end());
    for (VoxelIndex v : changed) data[v] = steps > 0 ? label : 0;
    members = voxels_with_label(volume, label);
  }
}

// Number of separate z-runs of slices containing the label; a blanked slice
// through a lesion splits it into disconnected pieces under any connectivity.
long z_pieces(const LabelVolume& volume, Label label) {
  const auto [nx, ny, nz] = volume.geometry().dims;
  const auto plane = static_cast<std::size_t>(nx * ny);
  const auto data = volume.voxels();
  long pieces = 0;
  bool previous = false;
  for (std::int64_t k = 0; k < nz; ++k) {
    const auto begin = data.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * plane);
    const bool present = std::find(begin, begin + static_cast<std::ptrdiff_t>(plane), label) != begin + static_cast<std::ptrdiff_t>(plane);
    if (present && !previous) ++pieces;
    previous = present;
  }
  return pieces;
}

Sphere sphere_from_json(const nlohmann::json& j) {
  Sphere s;
  const auto c = j.at("center_mm").get<std::vector<double>>();
  if (c.size() != 3) throw Error("center_mm must have three components");
  s.center_mm = {c[0], c[1], c[2]};
  s.radius_mm = j.at("radius_mm").get<double>();
  return s;
}

nlohmann::ordered_json sphere_to_json(const Sphere& s) {
  nlohmann::ordered_json j;
  j["center_mm"] = {s.center_mm[0], s.center_mm[1], s.center_mm[2]};
  j["radius_mm"] = s.radius_mm;
  return j;
}

}  // namespace

void validate(const PhantomSpec& spec) {
  spec.geometry.validate();
  std::vector<Sphere> all = spec.lesions;
  for (std::size_t n = 0; n < spec.lesions.size(); ++n)
    check_sphere(spec.lesions[n], spec.geometry, "lesion " + std::to_string(n + 1));
  if (spec.perturbation) {
    for (std::size_t n = 0; n < spec.perturbation->spurious.size(); ++n)
      check_sphere(spec.perturbation->spurious[n], spec.geometry, "spurious blob " + std::to_string(n + 1));
    all.insert(all.end(), spec.perturbation->spurious.begin(), spec.perturbation->spurious.end());
  }
  if (all.size() >= std::numeric_limits<Label>::max()) throw Error("too many lesions for 16-bit labels");
  check_separation(all, spec.geometry);
}

GeneratedPhantom generate(const PhantomSpec& spec) {
  validate(spec);
  GeneratedPhantom out{LabelVolume(spec.geometry), {}};
  for (std::size_t n = 0; n < spec.lesions.size(); ++n) {
    const Sphere& s = spec.lesions[n];
    const int id = static_cast<int>(n + 1);
    paint_sphere(out.gt, s, static_cast<Label>(id), false);
    const double r_cm = s.radius_mm / 10.0;
    out.expected.push_back({id, 4.0 / 3.0 * std::numbers::pi * r_cm * r_cm * r_cm, 2.0 * s.radius_mm,
                            stratify(2.0 * s.radius_mm)});
  }
  return out;
}

PerturbedPhantom perturb(const LabelVolume& gt, const PhantomSpec& spec) {
  validate(spec);
  assert_same_grid(gt.geometry(), spec.geometry);
  const auto n_lesions = static_cast<int>(spec.lesions.size());
  std::set<Label> present;
  for (Label v : gt.voxels())
    if (v != 0) present.insert(v);

  PerturbedPhantom out{gt, {}};
  if (!spec.perturbation || spec.perturbation->empty()) {
    out.expected.tp = static_cast<long>(present.size());
    return out;
  }
  const Perturbation& p = *spec.perturbation;
  auto check_id = [n_lesions](int id) {
    if (id < 1 || id > n_lesions) throw Error("perturbation references unknown lesion id " + std::to_string(id));
  };
  for (int id : p.drop) check_id(id);
  for (const auto& r : p.resize) check_id(r.lesion_id);
  for (std::int64_t z : p.blank_slices)
    if (z < 0 || z >= spec.geometry.dims[2]) throw Error("blank slice " + std::to_string(z) + " is outside the grid");

  const std::set<int> dropped(p.drop.begin(), p.drop.end());
  auto data = out.pred.voxels();
  for (auto& v : data)
    if (v != 0 && dropped.contains(v)) v = 0;
  for (const auto& r : p.resize)
    if (!dropped.contains(r.lesion_id)) resize_label(out.pred, static_cast<Label>(r.lesion_id), r.steps);
  for (std::size_t n = 0; n < p.spurious.size(); ++n)
    paint_sphere(out.pred, p.spurious[n], static_cast<Label>(n_lesions + 1 + static_cast<int>(n)), true);
  const auto plane = static_cast<std::size_t>(spec.geometry.dims[0] * spec.geometry.dims[1]);
  for (std::int64_t z : p.blank_slices)
    std::fill_n(data.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(z) * plane), plane, Label{0});

  for (Label id : present) {
    if (id > n_lesions) continue;
    const long pieces = dropped.contains(id) ? 0 : z_pieces(out.pred, id);
    if (pieces == 0) {
      ++out.expected.fn;
    } else {
      ++out.expected.tp;
      out.expected.fp += pieces - 1;
    }
  }
  for (std::size_t n = 0; n < p.spurious.size(); ++n)
    out.expected.fp += z_pieces(out.pred, static_cast<Label>(n_lesions + 1 + static_cast<int>(n)));
  return out;
}

void place_random_lesions(PhantomSpec& spec, int count, double min_radius_mm, double max_radius_mm) {
  if (count < 0) throw Error("random lesion count must be non-negative");
  if (!(min_radius_mm > 0) || max_radius_mm < min_radius_mm) throw Error("invalid random lesion radius range");
  spec.geometry.validate();
  Rng rng(spec.seed);
  const double gap = 2.0 * max_spacing(spec.geometry);
  std::vector<Sphere> existing = spec.lesions;
  if (spec.perturbation)
    existing.insert(existing.end(), spec.perturbation->spurious.begin(), spec.perturbation->spurious.end());
  for (int placed = 0; placed < count; ++placed) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !ok; ++attempt) {
      Sphere s;
      s.radius_mm = rng.uniform(min_radius_mm, max_radius_mm);
      for (int axis = 0; axis < 3; ++axis) {
        const double lo = spec.geometry.origin[axis] + s.radius_mm;
        const double hi = spec.geometry.origin[axis] +
                          static_cast<double>(spec.geometry.dims[axis] - 1) * spec.geometry.spacing[axis] - s.radius_mm;
        s.center_mm[axis] = rng.uniform(lo, hi);
      }
      ok = std::none_of(existing.begin(), existing.end(), [&](const Sphere& o) { return too_close(s, o, gap); });
      try {
        check_sphere(s, spec.geometry, "random lesion");
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        existing.push_back(s);
        spec.lesions.push_back(s);
      }
    }
    if (!ok) throw Error("could not place random lesion " + std::to_string(placed + 1) + " without overlap");
  }
}

PhantomSpec spec_from_json(const nlohmann::json& j) {
  try {
    PhantomSpec spec;
    const auto& g = j.at("geometry");
    const auto dims = g.at("dims").get<std::vector<std::int64_t>>();
    const auto spacing = g.at("spacing").get<std::vector<double>>();
    const auto origin = g.value("origin", std::vector<double>{0.0, 0.0, 0.0});
    if (dims.size() != 3 || spacing.size() != 3 || origin.size() != 3)
      throw Error("geometry dims, spacing and origin need three components");
    for (int axis = 0; axis < 3; ++axis) {
      spec.geometry.dims[axis] = dims[axis];
      spec.geometry.spacing[axis] = spacing[axis];
      spec.geometry.origin[axis] = origin[axis];
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& l : j.value("lesions", nlohmann::json::array())) spec.lesions.push_back(sphere_from_json(l));
    if (j.contains("perturbation")) {
      const auto& pj = j.at("perturbation");
      Perturbation p;
      for (const auto& r : pj.value("resize", nlohmann::json::array()))
        p.resize.push_back({r.at("lesion").get<int>(), r.at("steps").get<int>()});
      p.drop = pj.value("drop", std::vector<int>{});
      for (const auto& s : pj.value("spurious", nlohmann::json::array())) p.spurious.push_back(sphere_from_json(s));
      p.blank_slices = pj.value("blank_slices", std::vector<std::int64_t>{});
      spec.perturbation = std::move(p);
    }
    if (j.contains("random_lesions")) {
      const auto& r = j.at("random_lesions");
      place_random_lesions(spec, r.at("count").get<int>(), r.at("min_radius_mm").get<double>(),
                           r.at("max_radius_mm").get<double>());
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid phantom spec: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const PhantomSpec& spec) {
  nlohmann::ordered_json j;
  j["geometry"]["dims"] = spec.geometry.dims;
  j["geometry"]["spacing"] = spec.geometry.spacing;
  j["geometry"]["origin"] = spec.geometry.origin;
  j["seed"] = spec.seed;
  j["lesions"] = nlohmann::ordered_json::array();
  for (const auto& s : spec.lesions) j["lesions"].push_back(sphere_to_json(s));
  if (spec.perturbation) {
    auto& pj = j["perturbation"];
    pj["resize"] = nlohmann::ordered_json::array();
    for (const auto& r : spec.perturbation->resize) pj["resize"].push_back({{"lesion", r.lesion_id}, {"steps", r.steps}});
    pj["drop"] = spec.perturbation->drop;
    pj["spurious"] = nlohmann::ordered_json::array();
    for (const auto& s : spec.perturbation->spurious) pj["spurious"].push_back(sphere_to_json(s));
    pj["blank_slices"] = spec.perturbation->blank_slices;
  }
  return j;
}

}  // namespace lesionmetrics::phantom
