#include <doctest.h>

#include <algorithm>

#include "generators.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/instance_extraction.hpp"
#include "lesionmetrics/morphometry.hpp"
#include "oracles.hpp"

using namespace lesionmetrics;

namespace {

GridGeometry cube(std::int64_t n) {
  GridGeometry g;
  g.dims = {n, n, n};
  return g;
}

std::vector<std::vector<VoxelIndex>> partition(const std::vector<LesionInstance>& instances) {
  std::vector<std::vector<VoxelIndex>> out;
  for (const auto& inst : instances) out.push_back(inst.voxels);
  std::sort(out.begin(), out.end());
  return out;
}

void fill_box(LabelVolume& v, Index3 lo, Index3 hi, Label label = 1) {
  for (auto k = lo.k; k <= hi.k; ++k)
    for (auto j = lo.j; j <= hi.j; ++j)
      for (auto i = lo.i; i <= hi.i; ++i) v.at({i, j, k}) = label;
}

LesionInstance instance_of_size(int id, std::size_t n) {
  LesionInstance inst;
  inst.id = id;
  for (std::size_t v = 0; v < n; ++v) inst.voxels.push_back(v);
  return inst;
}

}  // namespace

TEST_CASE("empty mask has no instances") { CHECK(extract_instances(LabelVolume(cube(4))).empty()); }

TEST_CASE("diagonal voxel pair depends on connectivity") {
  LabelVolume v(cube(2));
  v.at({0, 0, 0}) = 1;
  v.at({1, 1, 1}) = 1;
  const auto c26 = extract_instances(v, Connectivity::twenty_six);
  REQUIRE(c26.size() == 1);
  CHECK(c26[0].voxel_count() == 2);
  CHECK(extract_instances(v, Connectivity::eighteen).size() == 2);
  CHECK(extract_instances(v, Connectivity::six).size() == 2);
  CHECK(partition(c26) == oracle::flood_fill(v, 26));
}

TEST_CASE("edge-adjacent voxels join under 18 but not 6") {
  LabelVolume v(cube(3));
  v.at({0, 0, 1}) = 1;
  v.at({1, 1, 1}) = 1;
  CHECK(extract_instances(v, Connectivity::eighteen).size() == 1);
  CHECK(extract_instances(v, Connectivity::six).size() == 2);
}

TEST_CASE("two cubes separated by a gap") {
  GridGeometry g;
  g.dims = {8, 3, 3};
  LabelVolume v(g);
  fill_box(v, {0, 0, 0}, {2, 2, 2});
  fill_box(v, {5, 0, 0}, {7, 2, 2}, 7);
  const auto inst = extract_instances(v);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].voxel_count() == 27);
  CHECK(inst[1].voxel_count() == 27);
  CHECK(partition(inst) == oracle::flood_fill(v, 26));
}

TEST_CASE("ids follow size, then the smallest voxel") {
  GridGeometry g;
  g.dims = {10, 10, 1};
  LabelVolume v(g);
  v.at({9, 0, 0}) = 1;                      // size 1, later in i order
  fill_box(v, {0, 9, 0}, {0, 9, 0});        // size 1, (0,9,0) is lexicographically first
  fill_box(v, {4, 4, 0}, {6, 6, 0});        // size 9
  const auto inst = extract_instances(v, Connectivity::six, MaskSource::predicted);
  REQUIRE(inst.size() == 3);
  CHECK(inst[0].id == 1);
  CHECK(inst[0].voxel_count() == 9);
  CHECK(inst[1].id == 2);
  CHECK(g.unravel(inst[1].voxels[0]) == Index3{0, 9, 0});
  CHECK(inst[2].id == 3);
  CHECK(g.unravel(inst[2].voxels[0]) == Index3{9, 0, 0});
  CHECK(inst[0].source == MaskSource::predicted);
  CHECK(inst[0].centroid_mm[0] == doctest::Approx(5.0));
  CHECK(inst[0].centroid_mm[1] == doctest::Approx(5.0));
}

TEST_CASE("random masks match the flood-fill oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const GridGeometry g = gen::random_geometry(rng, 14);
    const LabelVolume v = gen::random_mask(rng, g);
    std::size_t counts[3];
    int c = 0;
    for (int conn : {6, 18, 26}) {
      const auto inst = extract_instances(v, connectivity_from_int(conn));
      CHECK(partition(inst) == oracle::flood_fill(v, conn));
      std::size_t total = 0;
      for (std::size_t n = 0; n < inst.size(); ++n) {
        CHECK(inst[n].id == static_cast<int>(n + 1));
        CHECK(std::is_sorted(inst[n].voxels.begin(), inst[n].voxels.end()));
        if (n > 0) CHECK(inst[n - 1].voxel_count() >= inst[n].voxel_count());
        total += inst[n].voxel_count();
      }
      CHECK(total == v.foreground_count());
      counts[c++] = inst.size();
    }
    CHECK(counts[2] <= counts[1]);
    CHECK(counts[1] <= counts[0]);
  }
}

TEST_CASE("connectivity_from_int") {
  CHECK(connectivity_from_int(18) == Connectivity::eighteen);
  CHECK_THROWS_AS(connectivity_from_int(8), Error);
}

TEST_CASE("micro-nodule filter uses a strict bound") {
  std::vector<LesionInstance> inst{instance_of_size(1, 5), instance_of_size(2, 6)};
  MorphometryTable table;
  table[1].mean_diameter_mm = 2.9;
  table[2].mean_diameter_mm = 3.0;
  const auto split = filter_micro_nodules(inst, table);
  REQUIRE(split.kept.size() == 1);
  CHECK(split.kept[0].id == 2);
  REQUIRE(split.excluded.size() == 1);
  CHECK(split.excluded[0].id == 1);

  const auto empty = filter_micro_nodules({}, {});
  CHECK(empty.kept.empty());
  CHECK(empty.excluded.empty());
  CHECK_THROWS_AS(filter_micro_nodules({instance_of_size(3, 1)}, table), Error);
}

TEST_CASE("satellite removal") {
  std::vector<LesionInstance> inst{instance_of_size(1, 50), instance_of_size(2, 1)};
  const auto kept = remove_satellite_clusters(inst);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].voxel_count() == 50);
  CHECK(remove_satellite_clusters(inst, 1).size() == 2);
  CHECK(remove_satellite_clusters(inst, 100).empty());
}

TEST_CASE("repair fills a single missing slice") {
  GridGeometry g;
  g.dims = {9, 9, 30};
  LabelVolume v(g);
  fill_box(v, {2, 2, 10}, {6, 6, 20});
  fill_box(v, {2, 2, 15}, {6, 6, 15}, 0);
  CHECK(oracle::flood_fill(v, 26).size() == 2);
  const LabelVolume fixed = repair_split_lesions(v, 1);
  CHECK(oracle::flood_fill(fixed, 26).size() == 1);
  CHECK(extract_instances(fixed).size() == 1);
  CHECK(fixed.foreground_count() == 25u * 11u);
  CHECK(fixed.geometry() == g);
}

TEST_CASE("repair leaves gaps wider than the tolerance") {
  GridGeometry g;
  g.dims = {9, 9, 30};
  LabelVolume v(g);
  fill_box(v, {2, 2, 10}, {6, 6, 20});
  fill_box(v, {2, 2, 14}, {6, 6, 16}, 0);
  CHECK(repair_split_lesions(v, 1) == v);
  CHECK(extract_instances(repair_split_lesions(v, 1)).size() == 2);
  CHECK(extract_instances(repair_split_lesions(v, 3)).size() == 1);
}

TEST_CASE("repair is monotone and idempotent") {
  Rng rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const GridGeometry g = gen::random_geometry(rng, 10);
    const LabelVolume v = gen::random_mask(rng, g);
    const int gap = static_cast<int>(rng.uniform_int(0, 3));
    const LabelVolume once = repair_split_lesions(v, gap);
    for (std::size_t n = 0; n < v.voxels().size(); ++n)
      if (v.voxels()[n] != 0) CHECK(once.voxels()[n] == v.voxels()[n]);
    CHECK(repair_split_lesions(once, gap) == once);
    if (gap == 0) CHECK(once == v);
  }
}

TEST_CASE("solid masks are unchanged by repair") {
  LabelVolume v(cube(6));
  fill_box(v, {1, 1, 1}, {4, 4, 4});
  CHECK(repair_split_lesions(v, 2) == v);
}
