#include <doctest.h>

#include "generators.hpp"
#include "lesionmetrics/detection.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/instance_extraction.hpp"
#include "lesionmetrics/overlap_metrics.hpp"
#include "lesionmetrics/surface.hpp"
#include "oracles.hpp"

using namespace lesionmetrics;

namespace {

GridGeometry box(std::int64_t nx, std::int64_t ny, std::int64_t nz) {
  GridGeometry g;
  g.dims = {nx, ny, nz};
  return g;
}

std::vector<VoxelIndex> set_of(const GridGeometry& g, std::vector<Index3> pts) {
  std::vector<VoxelIndex> out;
  for (const auto& p : pts) out.push_back(g.linear(p));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VoxelIndex> cube_at(const GridGeometry& g, Index3 lo, int side) {
  std::vector<Index3> pts;
  for (int k = 0; k < side; ++k)
    for (int j = 0; j < side; ++j)
      for (int i = 0; i < side; ++i) pts.push_back({lo.i + i, lo.j + j, lo.k + k});
  return set_of(g, pts);
}

}  // namespace

TEST_CASE("dice examples") {
  const GridGeometry g = box(6, 4, 4);
  const auto a = cube_at(g, {0, 0, 0}, 2);
  const auto b = cube_at(g, {1, 0, 0}, 2);
  const auto far = cube_at(g, {4, 2, 2}, 2);
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, far) == 0.0);
  CHECK(dice(a, b) == 0.5);
  CHECK(dice(std::vector<VoxelIndex>{}, std::vector<VoxelIndex>{}) == 1.0);
  CHECK(intersection_size(a, b) == 4);
}

TEST_CASE("hausdorff examples") {
  const GridGeometry g = box(11, 11, 11);
  CHECK(hausdorff(set_of(g, {{0, 0, 0}}), set_of(g, {{3, 4, 0}}), g) == 5.0);
  CHECK(hausdorff(set_of(g, {{0, 0, 0}}), set_of(g, {{0, 0, 0}, {0, 0, 10}}), g) == 10.0);
  const auto a = cube_at(g, {2, 2, 2}, 4);
  CHECK(hausdorff(a, a, g) == 0.0);
  CHECK_THROWS_WITH_AS(hausdorff(a, std::vector<VoxelIndex>{}, g), "undefined HD: empty voxel set", Error);
}

TEST_CASE("anisotropic spacing enters the distance") {
  GridGeometry g = box(5, 5, 5);
  g.spacing = {0.5, 2.0, 3.0};
  CHECK(hausdorff(set_of(g, {{0, 0, 0}}), set_of(g, {{4, 1, 1}}), g) == doctest::Approx(std::sqrt(4.0 + 4.0 + 9.0)));
}

TEST_CASE("boundary matches the oracle") {
  Rng rng(505);
  for (int trial = 0; trial < 30; ++trial) {
    const GridGeometry g = gen::random_geometry(rng, 10);
    const auto set = gen::random_set(rng, g, rng.uniform(0.1, 0.95));
    auto mine = boundary_voxels(set, g);
    auto ref = oracle::boundary(set, g);
    std::sort(mine.begin(), mine.end());
    std::sort(ref.begin(), ref.end());
    CHECK(mine == ref);
  }
}

TEST_CASE("random sets match brute-force dice and hausdorff") {
  Rng rng(606);
  for (int trial = 0; trial < 60; ++trial) {
    const GridGeometry g = gen::random_geometry(rng, 12);
    const auto a = gen::random_set(rng, g, rng.uniform(0.01, 0.6));
    const auto b = gen::random_set(rng, g, rng.uniform(0.01, 0.6));
    CHECK(dice(a, b) == oracle::dice(a, b));
    CHECK(dice(a, b) == dice(b, a));
    CHECK(dice(a, b) >= 0.0);
    CHECK(dice(a, b) <= 1.0);
    if (a.empty() || b.empty()) continue;
    const double hd = hausdorff(a, b, g);
    CHECK(std::abs(hd - oracle::hausdorff(oracle::boundary(a, g), oracle::boundary(b, g), g.spacing)) <= 1e-9);
    CHECK(hd == hausdorff(b, a, g));
    CHECK(hausdorff(a, a, g) == 0.0);
  }
}

TEST_CASE("whole-volume overloads") {
  const GridGeometry g = box(6, 4, 4);
  LabelVolume a(g), b(g);
  for (auto v : cube_at(g, {0, 0, 0}, 2)) a.voxels()[v] = 1;
  for (auto v : cube_at(g, {1, 0, 0}, 2)) b.voxels()[v] = 3;
  CHECK(dice(a, b) == 0.5);
  CHECK(hausdorff(a, b) == 1.0);
  GridGeometry other = g;
  other.dims[0] = 7;
  CHECK_THROWS_AS(dice(a, LabelVolume(other)), Error);
}

TEST_CASE("per_pair_scores") {
  const GridGeometry g = box(10, 4, 4);
  LabelVolume gt(g), pred(g);
  for (auto v : cube_at(g, {0, 0, 0}, 2)) gt.voxels()[v] = 1;
  for (auto v : cube_at(g, {1, 0, 0}, 2)) pred.voxels()[v] = 1;
  for (auto v : cube_at(g, {6, 1, 1}, 3)) gt.voxels()[v] = pred.voxels()[v] = 2;
  const auto gi = extract_instances(gt);
  const auto pi = extract_instances(pred, Connectivity::twenty_six, MaskSource::predicted);
  const auto scores = per_pair_scores(match_lesions(gi, pi), gi, pi, g);
  REQUIRE(scores.size() == 2);
  for (const auto& s : scores) {
    const bool big = gi[static_cast<std::size_t>(s.gt_id - 1)].voxel_count() == 27;
    CHECK(s.scores.dice == (big ? 1.0 : 0.5));
    CHECK(s.scores.hausdorff_mm == (big ? 0.0 : 1.0));
  }
  CHECK(per_pair_scores(MatchResult{}, gi, pi, g).empty());
}
