#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/instance_extraction.hpp"
#include "lesionmetrics/morphometry.hpp"
#include "lesionmetrics/surface.hpp"
#include "oracles.hpp"

using namespace lesionmetrics;

namespace {

LesionInstance instance_from(const std::vector<Index3>& pts, const GridGeometry& g) {
  LesionInstance inst;
  inst.id = 1;
  for (const auto& p : pts) inst.voxels.push_back(g.linear(p));
  std::sort(inst.voxels.begin(), inst.voxels.end());
  return inst;
}

GridGeometry grid_for(int extent, Vec3 spacing = {1, 1, 1}) {
  GridGeometry g;
  g.dims = {extent + 1, extent + 1, extent + 1};
  g.spacing = spacing;
  return g;
}

LesionInstance sphere(double radius_mm, double spacing, GridGeometry& g) {
  const auto n = static_cast<std::int64_t>(std::ceil(2 * radius_mm / spacing)) + 3;
  g.dims = {n, n, n};
  g.spacing = {spacing, spacing, spacing};
  const double c = spacing * static_cast<double>(n - 1) / 2.0;
  std::vector<Index3> pts;
  for (std::int64_t k = 0; k < n; ++k)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t i = 0; i < n; ++i) {
        const Vec3 p = g.position_mm({i, j, k});
        const double d2 = (p[0] - c) * (p[0] - c) + (p[1] - c) * (p[1] - c) + (p[2] - c) * (p[2] - c);
        if (d2 <= radius_mm * radius_mm) pts.push_back({i, j, k});
      }
  return instance_from(pts, g);
}

}  // namespace

TEST_CASE("single voxel has zero diameter") {
  const GridGeometry g = grid_for(0);
  const Morphometry m = measure_lesion(instance_from({{0, 0, 0}}, g), g);
  CHECK(m.volume_cc == doctest::Approx(0.001));
  CHECK(m.long_axis_mm == 0.0);
  CHECK(m.short_axis_mm == 0.0);
  CHECK(m.mean_diameter_mm == 0.0);
  CHECK(m.stratum == Stratum::micro);
}

TEST_CASE("solid 5x9x3 box") {
  const GridGeometry g = grid_for(9);
  std::vector<Index3> pts;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 9; ++j)
      for (int i = 0; i < 5; ++i) pts.push_back({i, j, k});
  const Morphometry m = measure_lesion(instance_from(pts, g), g);
  CHECK(m.long_axis_mm == doctest::Approx(std::sqrt(84.0)).epsilon(1e-12));
  const auto bnd = boundary_voxels(instance_from(pts, g).voxels, g);
  const auto ref = oracle::feret(bnd, g.spacing);
  CHECK(m.long_axis_mm == doctest::Approx(ref.long_axis).epsilon(1e-12));
  CHECK(m.short_axis_mm == doctest::Approx(ref.short_axis).epsilon(1e-12));
  CHECK(m.mean_diameter_mm == doctest::Approx((m.long_axis_mm + m.short_axis_mm) / 2));
  CHECK(m.volume_cc == doctest::Approx(135 * 0.001));
}

TEST_CASE("digitized sphere r = 6 mm at 0.5 mm") {
  GridGeometry g;
  const LesionInstance inst = sphere(6.0, 0.5, g);
  const Morphometry m = measure_lesion(inst, g);
  const double analytic = 4.0 / 3.0 * std::numbers::pi * 0.6 * 0.6 * 0.6;
  CHECK(std::abs(m.volume_cc - analytic) / analytic < 0.03);
  CHECK(std::abs(m.mean_diameter_mm - 12.0) / 12.0 < 0.05);
  CHECK(m.stratum == Stratum::significant);
}

TEST_CASE("volume is voxel count times voxel volume") {
  GridGeometry g = grid_for(5, {0.7, 0.9, 1.3});
  Rng rng(5);
  const auto inst = instance_from(gen::random_blob(rng, 5), g);
  CHECK(measure_lesion(inst, g).volume_cc == static_cast<double>(inst.voxel_count()) * voxel_volume_cc(g));
}

TEST_CASE("stratify boundaries") {
  CHECK(stratify(0.0) == Stratum::micro);
  CHECK(stratify(2.9) == Stratum::micro);
  CHECK(stratify(3.0) == Stratum::small);
  CHECK(stratify(10.0) == Stratum::small);
  CHECK(stratify(10.1) == Stratum::significant);
  CHECK(stratify(1e6) == Stratum::significant);
  CHECK_THROWS_AS(stratify(-0.1), Error);
  CHECK_THROWS_AS(stratify(std::nan("")), Error);
  for (Stratum s : {Stratum::micro, Stratum::small, Stratum::significant}) CHECK(stratum_from_string(to_string(s)) == s);
}

TEST_CASE("empty instance is an error") {
  const GridGeometry g = grid_for(1);
  CHECK_THROWS_AS(measure_lesion(LesionInstance{}, g), Error);
}

TEST_CASE("feret matches the exhaustive oracle on random blobs") {
  Rng rng(303);
  for (int trial = 0; trial < 80; ++trial) {
    const int extent = static_cast<int>(rng.uniform_int(1, 14));
    const Vec3 spacing{0.25 * static_cast<double>(rng.uniform_int(1, 8)), 0.25 * static_cast<double>(rng.uniform_int(1, 8)),
                       0.25 * static_cast<double>(rng.uniform_int(1, 8))};
    const GridGeometry g = grid_for(extent, spacing);
    const auto pts = gen::random_blob(rng, extent);
    const auto bnd = boundary_voxels(instance_from(pts, g).voxels, g);
    const FeretDiameters f = feret_diameters(bnd, spacing);
    const auto ref = oracle::feret(bnd, spacing);
    CHECK(std::abs(f.long_axis_mm - ref.long_axis) <= 1e-9);
    CHECK(std::abs(f.short_axis_mm - ref.short_axis) <= 1e-9);
    CHECK(f.short_axis_mm <= f.long_axis_mm);
  }
}

TEST_CASE("degenerate point sets") {
  const Vec3 s{1, 1, 1};
  std::vector<Index3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {5, 0, 0}};
  auto f = feret_diameters(line, s);
  CHECK(f.long_axis_mm == 5.0);
  CHECK(f.short_axis_mm == 0.0);
  std::vector<Index3> plane{{0, 0, 2}, {3, 0, 2}, {0, 4, 2}, {1, 1, 2}};
  f = feret_diameters(plane, s);
  CHECK(f.long_axis_mm == 5.0);
  CHECK(f.short_axis_mm == doctest::Approx(oracle::feret(plane, s).short_axis).epsilon(1e-12));
}

TEST_CASE("translation invariance and spacing covariance") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int extent = static_cast<int>(rng.uniform_int(2, 8));
    const auto pts = gen::random_blob(rng, extent);
    GridGeometry g = grid_for(extent + 4, {0.5, 0.75, 1.25});
    const Morphometry base = measure_lesion(instance_from(pts, g), g);

    std::vector<Index3> moved;
    for (const auto& p : pts) moved.push_back({p.i + 3, p.j + 1, p.k + 2});
    const Morphometry shifted = measure_lesion(instance_from(moved, g), g);
    CHECK(shifted.long_axis_mm == base.long_axis_mm);
    CHECK(shifted.short_axis_mm == base.short_axis_mm);
    CHECK(shifted.volume_cc == base.volume_cc);
    CHECK(shifted.stratum == base.stratum);

    GridGeometry g2 = g;
    for (auto& s : g2.spacing) s *= 2;
    const Morphometry doubled = measure_lesion(instance_from(pts, g2), g2);
    CHECK(doubled.long_axis_mm == 2 * base.long_axis_mm);
    CHECK(doubled.short_axis_mm == 2 * base.short_axis_mm);
    CHECK(doubled.mean_diameter_mm == 2 * base.mean_diameter_mm);
    CHECK(doubled.volume_cc == doctest::Approx(8 * base.volume_cc).epsilon(1e-14));
  }
}

TEST_CASE("measure_lesions keys by id") {
  GridGeometry g = grid_for(6);
  LabelVolume v(g);
  v.at({0, 0, 0}) = 1;
  v.at({5, 5, 5}) = 1;
  v.at({5, 4, 5}) = 1;
  const auto inst = extract_instances(v);
  const auto table = measure_lesions(inst, g);
  REQUIRE(table.size() == 2);
  CHECK(table.at(1).long_axis_mm == 1.0);
  CHECK(table.at(2).long_axis_mm == 0.0);
}
