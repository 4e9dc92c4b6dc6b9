#include <doctest.h>

#include "reproj/geometry.hpp"
#include "reproj/scene.hpp"
#include "reproj/zbuffer.hpp"

#include <algorithm>
#include <cmath>

using namespace reproj;

namespace {

// Pipeline visibility of frame t's points in frame t+1, as a per-pixel mask.
std::vector<std::uint8_t> pipeline_visibility(const SceneSpec& spec,
                                              const GroundTruth& gt) {
  const Intrinsics& intr = spec.camera_t.intrinsics;
  const PointCloud cloud = transform(inverse_project(gt.depth_t, intr),
                                     invert(relative_pose(spec)));
  const ProjectionOutcome outcome = project(cloud, intr);
  const InFrameSubset subset = in_frame_positive_subset(outcome);
  const ZBufferResult zres =
      zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());

  std::vector<std::uint8_t> mask(intr.pixel_count(), 0);
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (!zres.visible[s]) continue;
    const auto [i, j] = cloud.source_pixels()[subset.point_indices[s]];
    mask[gt.depth_t.index(i, j)] = 1;
  }
  return mask;
}

}  // namespace

TEST_CASE("single fronto-parallel plane, identity pose: everything visible") {
  SceneSpec spec;
  const Intrinsics intr(20, 20, 7.5, 7.5, 16, 16);
  spec.camera_t = {intr, RigidTransform::identity()};
  spec.camera_t1 = {intr, RigidTransform::identity()};
  Primitive plane;
  plane.z = 10.0;
  plane.infinite = true;
  spec.primitives.push_back(plane);

  const GroundTruth gt = generate(spec);
  CHECK(gt.depth_t.valid_count() == intr.pixel_count());
  CHECK(gt.visible_count() == intr.pixel_count());
  CHECK(gt.negative_count() == 0);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) CHECK(gt.depth_t.at(i, j) == 10.0);
}

TEST_CASE("primitive behind camera t is rejected") {
  SceneSpec spec;
  const Intrinsics intr(20, 20, 7.5, 7.5, 16, 16);
  spec.camera_t = {intr, RigidTransform::identity()};
  spec.camera_t1 = {intr, RigidTransform::identity()};
  Primitive plane;
  plane.z = -1.0;
  plane.infinite = true;
  spec.primitives.push_back(plane);
  CHECK_THROWS_AS(generate(spec), InvalidInput);
}

TEST_CASE("two-plane lateral scene hides exactly the closed-form band") {
  // Geometry of two_plane_occlusion_spec: fx = 50, baseline +0.4 m.
  // Near rectangle at 5 m shifts left 4 px, far plane at 10 m shifts 2 px.
  // Near pixels are i in {22..35}, j in {17..46}; their cells are {18..31}.
  // A far pixel i lands on cell i-2, so it is hidden iff i-2 in {18..31}
  // and i is not itself a near pixel: i in {20, 21}. Far pixels i in {0,1}
  // fall out of frame on the left.
  const SceneSpec spec = two_plane_occlusion_spec();
  const GroundTruth gt = generate(spec);

  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      const bool near_pixel = i >= 22 && i <= 35 && j >= 17 && j <= 46;
      CHECK(gt.depth_t.at(i, j) == (near_pixel ? 5.0 : 10.0));
      bool expect_visible;
      if (near_pixel) {
        expect_visible = true;
      } else {
        const bool occluded = (i == 20 || i == 21) && j >= 17 && j <= 46;
        const bool off_frame = i < 2;
        expect_visible = !occluded && !off_frame;
      }
      CHECK(gt.visible_t_to_t1[gt.depth_t.index(i, j)] ==
            (expect_visible ? 1 : 0));
    }
  }
  CHECK(gt.negative_count() == 0);
}

TEST_CASE("squeezed rectangle lands in the negative set") {
  // negative_depth_spec: rectangle pixels are i,j in {26..37} at depth 2,
  // camera t+1 sits at z = 2.5, so their new depth is exactly -0.5 and the
  // projection u = 157.5 - 4i stays inside [0, 64) for that range.
  const SceneSpec spec = negative_depth_spec();
  const GroundTruth gt = generate(spec);

  std::size_t expected = 0;
  for (int j = 26; j <= 37; ++j)
    for (int i = 26; i <= 37; ++i) {
      CHECK(gt.negative_t_to_t1[gt.depth_t.index(i, j)] == 1);
      ++expected;
    }
  CHECK(expected == 144);
  CHECK(gt.negative_count() == expected);

  // And the pipeline classifies the same pixels NegativeInFrame.
  const Intrinsics& intr = spec.camera_t.intrinsics;
  const PointCloud cloud = transform(inverse_project(gt.depth_t, intr),
                                     invert(relative_pose(spec)));
  const ProjectionOutcome outcome = project(cloud, intr);
  std::size_t negative = 0;
  for (std::size_t p = 0; p < outcome.size(); ++p) {
    if (outcome.status[p] != PointStatus::NegativeInFrame) continue;
    ++negative;
    CHECK(outcome.depth[p] == -0.5);
  }
  CHECK(negative == expected);
}

TEST_CASE("kitti-like scenes have the paper's frame geometry") {
  for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
    const SceneSpec spec = kitti_like_spec(seed);
    CHECK(spec.camera_t.intrinsics.width == 1216);
    CHECK(spec.camera_t.intrinsics.height == 352);
    CHECK(spec.primitives.size() >= 11);  // background + at least 10
    CHECK(spec.primitives.size() <= 51);

    const GroundTruth gt = generate(spec);
    CHECK(gt.depth_t.valid_count() == 352 * 1216);
    double lo = 1e300, hi = 0.0;
    for (const auto* dm : {&gt.depth_t, &gt.depth_t1}) {
      for (const double d : dm->values()) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    CHECK(lo > 1.0);
    CHECK(hi <= 80.0);
  }
}

TEST_CASE("generation is bit-identical for a fixed seed") {
  const GroundTruth a = generate(kitti_like_spec(5));
  const GroundTruth b = generate(kitti_like_spec(5));
  CHECK(a.depth_t.values() == b.depth_t.values());
  CHECK(a.depth_t1.values() == b.depth_t1.values());
  CHECK(a.image_t.pixels() == b.image_t.pixels());
  CHECK(a.image_t1.pixels() == b.image_t1.pixels());
  CHECK(a.visible_t_to_t1 == b.visible_t_to_t1);
  CHECK(a.negative_t_to_t1 == b.negative_t_to_t1);
}

TEST_CASE("perturb_depth") {
  const GroundTruth gt = generate(smooth_scene_spec(3));
  SUBCASE("amplitude zero is the identity") {
    const DepthMap out = perturb_depth(gt, 0.0, 9);
    CHECK(out.values() == gt.depth_t.values());
  }
  SUBCASE("bounded and deterministic") {
    const DepthMap a = perturb_depth(gt, 0.05, 9);
    const DepthMap b = perturb_depth(gt, 0.05, 9);
    CHECK(a.values() == b.values());
    double max_delta = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k)
      max_delta = std::max(max_delta,
                           std::abs(a.values()[k] - gt.depth_t.values()[k]));
    CHECK(max_delta <= 0.05);
    CHECK(max_delta > 0.0);
    const DepthMap c = perturb_depth(gt, 0.05, 10);
    CHECK(a.values() != c.values());
  }
}

TEST_CASE("pipeline visibility equals the scene's analytic mask") {
  // End-to-end consistency on scenes with real occlusion bands.
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const SceneSpec spec = occlusion_scene_spec(seed);
    const GroundTruth gt = generate(spec);
    const std::vector<std::uint8_t> mask = pipeline_visibility(spec, gt);
    CHECK(mask == gt.visible_t_to_t1);
    CHECK(gt.visible_count() < gt.depth_t.valid_count());  // band is nonempty
  }
  const SceneSpec spec = two_plane_occlusion_spec();
  const GroundTruth gt = generate(spec);
  CHECK(pipeline_visibility(spec, gt) == gt.visible_t_to_t1);
}
