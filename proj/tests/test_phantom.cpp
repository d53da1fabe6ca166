#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lesionmetrics/detection.hpp"
#include "lesionmetrics/error.hpp"
#include "lesionmetrics/instance_extraction.hpp"
#include "lesionmetrics/morphometry.hpp"
#include "lesionmetrics/phantom.hpp"

using namespace lesionmetrics;
using namespace lesionmetrics::phantom;

namespace {

PhantomSpec base_spec() {
  PhantomSpec spec;
  spec.geometry.dims = {60, 60, 60};
  spec.geometry.spacing = {0.5, 0.5, 0.5};
  spec.lesions = {{{7.5, 7.5, 7.5}, 3.0}, {{20.0, 8.0, 8.0}, 4.0}, {{14.0, 21.0, 20.0}, 5.0}};
  spec.seed = 42;
  return spec;
}

ExpectedMatch score(const LabelVolume& gt, const LabelVolume& pred) {
  const auto g = extract_instances(gt);
  const auto p = extract_instances(pred, Connectivity::twenty_six, MaskSource::predicted);
  const auto m = match_lesions(g, p);
  return {static_cast<long>(m.pairs.size()), static_cast<long>(m.unmatched_pred.size()),
          static_cast<long>(m.unmatched_gt.size())};
}

void check_counts(const ExpectedMatch& got, const ExpectedMatch& want) {
  CHECK(got.tp == want.tp);
  CHECK(got.fp == want.fp);
  CHECK(got.fn == want.fn);
}

}  // namespace

TEST_CASE("sphere r = 6 mm at 0.5 mm") {
  PhantomSpec spec;
  spec.geometry.dims = {40, 40, 40};
  spec.geometry.spacing = {0.5, 0.5, 0.5};
  spec.lesions = {{{10.0, 10.0, 10.0}, 6.0}};
  const auto ph = generate(spec);
  const double cc = static_cast<double>(ph.gt.foreground_count()) * voxel_volume_cc(spec.geometry);
  CHECK(std::abs(cc - 0.9048) / 0.9048 < 0.03);
  REQUIRE(ph.expected.size() == 1);
  CHECK(ph.expected[0].volume_cc == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 0.216));
  CHECK(ph.expected[0].diameter_mm == 12.0);
  CHECK(ph.expected[0].stratum == Stratum::significant);
}

TEST_CASE("voxel membership follows the centre rule") {
  const PhantomSpec spec = base_spec();
  const auto ph = generate(spec);
  const GridGeometry& g = spec.geometry;
  for (std::int64_t k = 0; k < g.dims[2]; ++k)
    for (std::int64_t j = 0; j < g.dims[1]; ++j)
      for (std::int64_t i = 0; i < g.dims[0]; ++i) {
        const Vec3 p = g.position_mm({i, j, k});
        Label want = 0;
        for (std::size_t n = 0; n < spec.lesions.size(); ++n) {
          const auto& s = spec.lesions[n];
          double d2 = 0;
          for (int a = 0; a < 3; ++a) d2 += (p[a] - s.center_mm[a]) * (p[a] - s.center_mm[a]);
          if (d2 <= s.radius_mm * s.radius_mm) want = static_cast<Label>(n + 1);
        }
        CHECK(ph.gt.at({i, j, k}) == want);
      }
}

TEST_CASE("no lesions and determinism") {
  PhantomSpec spec = base_spec();
  spec.lesions.clear();
  CHECK(generate(spec).gt.foreground_count() == 0);
  CHECK(generate(base_spec()).gt == generate(base_spec()).gt);
}

TEST_CASE("large spheres are accurate") {
  PhantomSpec spec;
  spec.geometry.dims = {50, 50, 50};
  spec.geometry.spacing = {0.5, 0.5, 0.5};
  spec.lesions = {{{12.0, 12.5, 12.25}, 8.0 * 0.5 * 1.5}};  // r = 12 voxels
  const auto ph = generate(spec);
  const auto inst = extract_instances(ph.gt);
  REQUIRE(inst.size() == 1);
  const auto m = measure_lesion(inst[0], spec.geometry);
  const double r = spec.lesions[0].radius_mm;
  CHECK(std::abs(m.volume_cc - ph.expected[0].volume_cc) / ph.expected[0].volume_cc < 0.02);
  CHECK(std::abs(m.long_axis_mm - 2 * r) <= std::sqrt(3.0) * 0.5);
}

TEST_CASE("validation") {
  PhantomSpec spec = base_spec();
  spec.lesions.push_back({{8.0, 8.0, 8.0}, 1.0});
  CHECK_THROWS_AS(generate(spec), Error);  // overlaps lesion 1
  spec = base_spec();
  spec.lesions.push_back({{29.0, 29.0, 29.0}, 2.0});
  CHECK_THROWS_AS(generate(spec), Error);  // leaves the grid
  spec = base_spec();
  spec.lesions[0].radius_mm = 0.0;
  CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("perturb: identity, drop, spurious") {
  PhantomSpec spec = base_spec();
  const auto ph = generate(spec);
  const auto same = perturb(ph.gt, spec);
  CHECK(same.pred == ph.gt);
  check_counts(same.expected, {3, 0, 0});

  spec.perturbation = Perturbation{};
  CHECK(perturb(ph.gt, spec).pred == ph.gt);

  spec.perturbation->drop = {2};
  const auto dropped = perturb(ph.gt, spec);
  check_counts(dropped.expected, {2, 0, 1});
  check_counts(score(ph.gt, dropped.pred), dropped.expected);

  spec.perturbation->spurious = {{{5.0, 24.0, 24.0}, 2.0}};
  const auto extra = perturb(ph.gt, spec);
  check_counts(extra.expected, {2, 1, 1});
  check_counts(score(ph.gt, extra.pred), extra.expected);

  spec.perturbation->drop = {7};
  CHECK_THROWS_WITH_AS(perturb(ph.gt, spec), "perturbation references unknown lesion id 7", Error);
}

TEST_CASE("perturb: resize keeps detection and moves volume") {
  PhantomSpec spec = base_spec();
  spec.perturbation = Perturbation{};
  spec.perturbation->resize = {{1, 1}, {3, -2}};
  const auto ph = generate(spec);
  const auto r = perturb(ph.gt, spec);
  check_counts(r.expected, {3, 0, 0});
  check_counts(score(ph.gt, r.pred), r.expected);
  std::size_t gt1 = 0, pr1 = 0, gt3 = 0, pr3 = 0;
  for (std::size_t n = 0; n < ph.gt.voxels().size(); ++n) {
    gt1 += ph.gt.voxels()[n] == 1;
    pr1 += r.pred.voxels()[n] == 1;
    gt3 += ph.gt.voxels()[n] == 3;
    pr3 += r.pred.voxels()[n] == 3;
  }
  CHECK(pr1 > gt1);
  CHECK(pr3 < gt3);
}

TEST_CASE("blank slice splits a sphere that repair rejoins") {
  PhantomSpec spec = base_spec();
  const auto ph = generate(spec);
  spec.perturbation = Perturbation{};
  spec.perturbation->blank_slices = {40};  // z = 20 mm, through the middle of lesion 3
  const auto blank = perturb(ph.gt, spec);
  std::size_t pieces = 0;
  for (const auto& inst : extract_instances(blank.pred))
    if (blank.pred.voxels()[inst.voxels[0]] == 3) ++pieces;
  CHECK(pieces == 2);
  check_counts(blank.expected, {3, 1, 0});
  check_counts(score(ph.gt, blank.pred), blank.expected);
  CHECK(extract_instances(repair_split_lesions(blank.pred, 1)).size() == 3);
}

TEST_CASE("random placement is seeded") {
  PhantomSpec a = base_spec();
  PhantomSpec b = base_spec();
  place_random_lesions(a, 4, 1.0, 2.5);
  place_random_lesions(b, 4, 1.0, 2.5);
  REQUIRE(a.lesions.size() == 7);
  for (std::size_t n = 0; n < a.lesions.size(); ++n) {
    CHECK(a.lesions[n].center_mm == b.lesions[n].center_mm);
    CHECK(a.lesions[n].radius_mm == b.lesions[n].radius_mm);
  }
  CHECK_NOTHROW(validate(a));
  PhantomSpec c = base_spec();
  c.seed = 43;
  place_random_lesions(c, 4, 1.0, 2.5);
  CHECK(c.lesions[3].center_mm != a.lesions[3].center_mm);
}

TEST_CASE("json round trip") {
  PhantomSpec spec = base_spec();
  spec.perturbation = Perturbation{};
  spec.perturbation->drop = {1};
  spec.perturbation->resize = {{2, -1}};
  spec.perturbation->spurious = {{{5.0, 24.0, 24.0}, 2.0}};
  spec.perturbation->blank_slices = {3};
  const auto back = spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
  CHECK(back.geometry == spec.geometry);
  CHECK(back.seed == spec.seed);
  CHECK(generate(back).gt == generate(spec).gt);
  CHECK(perturb(generate(back).gt, back).pred == perturb(generate(spec).gt, spec).pred);

  const auto j = nlohmann::json::parse(R"({"geometry":{"dims":[30,30,30],"spacing":[1,1,1],"origin":[0,0,0]},
    "seed":9,"random_lesions":{"count":3,"min_radius_mm":1.5,"max_radius_mm":3}})");
  const auto rnd = spec_from_json(j);
  CHECK(rnd.lesions.size() == 3);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"seed":1})")), Error);
}
