#include <doctest.h>

#include "reproj/jsonio.hpp"
#include "reproj/scene.hpp"

#include <Eigen/Geometry>

using namespace reproj;

TEST_CASE("intrinsics and pose survive a JSON round trip") {
  const Intrinsics intr(721.5, 720.25, 607.5, 175.5, 1216, 352);
  const Intrinsics back = intrinsics_from_json(to_json(intr));
  CHECK(back.fx == intr.fx);
  CHECK(back.fy == intr.fy);
  CHECK(back.cx == intr.cx);
  CHECK(back.cy == intr.cy);
  CHECK(back.width == intr.width);
  CHECK(back.height == intr.height);

  const RigidTransform pose(
      Eigen::AngleAxisd(0.3, Vec3(0.1, 0.9, 0.2).normalized())
          .toRotationMatrix(),
      Vec3(0.54, -0.01, 0.2));
  const RigidTransform back_pose = pose_from_json(to_json(pose));
  CHECK(back_pose.rotation == pose.rotation);
  CHECK(back_pose.translation == pose.translation);
}

TEST_CASE("scene specs survive a JSON round trip, bit for bit") {
  for (std::uint64_t seed : {0ull, 3ull}) {
    const SceneSpec spec = kitti_like_spec(seed);
    const SceneSpec back = scene_spec_from_json(to_json(spec));
    CHECK(back.seed == spec.seed);
    REQUIRE(back.primitives.size() == spec.primitives.size());
    const GroundTruth a = generate(spec);
    const GroundTruth b = generate(back);
    CHECK(a.depth_t.values() == b.depth_t.values());
    CHECK(a.image_t.pixels() == b.image_t.pixels());
    CHECK(a.visible_t_to_t1 == b.visible_t_to_t1);
  }
}

TEST_CASE("JSON parse errors carry byte offsets") {
  try {
    parse_json("{\"fx\": 1.0,,}");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.byte_offset() > 0);
  }
  CHECK_THROWS_AS(intrinsics_from_json(parse_json("{\"fx\": 1.0}")),
                  FormatError);
  CHECK_THROWS_AS(pose_from_json(parse_json("{\"rotation\": [1,2]}")),
                  FormatError);
}

TEST_CASE("malformed pose content is rejected as invalid, not crashed") {
  // A non-orthonormal rotation parses fine but fails the type invariant.
  const char* doc =
      "{\"rotation\": [1,0,0, 0,1,0, 0,0,2], \"translation\": [0,0,0]}";
  CHECK_THROWS_AS(pose_from_json(parse_json(doc)), InvalidInput);
}
