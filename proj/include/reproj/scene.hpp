#pragma once

#include "reproj/losses.hpp"
#include "reproj/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace reproj {

enum class TextureKind : std::uint8_t { Constant, SmoothGradient, Checkerboard };

/// Surface color as a function of the world (x, y) position on the
/// primitive, so both cameras see the same color for the same point.
struct Texture {
  TextureKind kind = TextureKind::Constant;
  std::array<double, 3> base{0.5, 0.5, 0.5};
  // SmoothGradient: base + amplitude * sin(2*pi*(fx*x + fy*y) + phase),
  // phase advanced per channel.
  std::array<double, 3> amplitude{0.0, 0.0, 0.0};
  double freq_x = 0.0;
  double freq_y = 0.0;
  double phase = 0.0;
  // Checkerboard: alternates between base and alt on square tiles.
  std::array<double, 3> alt{0.0, 0.0, 0.0};
  double tile = 1.0;
};

/// A fronto-parallel textured surface: the world plane z = depth, either
/// infinite or clipped to [x0, x1] x [y0, y1]. Keeping every primitive
/// fronto-parallel gives occlusion bands closed forms.
struct Primitive {
  double z = 1.0;
  bool infinite = false;
  double x0 = 0.0, x1 = 0.0;
  double y0 = 0.0, y1 = 0.0;
  Texture texture;
};

struct CameraRig {
  Intrinsics intrinsics;
  RigidTransform world_to_camera;  // p_camera = R * p_world + t
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  CameraRig camera_t;
  CameraRig camera_t1;
  double noise_amplitude = 0.0;  // carried for the harness; see perturb_depth
  std::uint64_t seed = 0;
};

/// Rendered frames plus analytic occlusion/negative-depth ground truth for
/// the t -> t+1 direction. The masks are per pixel of frame t and false at
/// invalid pixels.
///
/// visible_t_to_t1 marks pixels whose 3D point lands inside frame t+1 with
/// positive depth and is not beaten there by a strictly nearer frame-t
/// point projecting to the same raster cell (the raster notion of
/// occlusion: two points colliding on one pixel of the other image). It is
/// computed here from the rendered geometry alone, with the same projection
/// and rounding conventions the pipeline uses, and never by the z-buffer
/// under test.
struct GroundTruth {
  DepthMap depth_t;
  DepthMap depth_t1;
  Image image_t;
  Image image_t1;
  std::vector<std::uint8_t> visible_t_to_t1;
  std::vector<std::uint8_t> negative_t_to_t1;

  std::size_t visible_count() const;
  std::size_t negative_count() const;
};

/// Renders the scene deterministically: per-pixel nearest-primitive ray
/// intersection for depth and color, then the analytic visibility and
/// negative-depth masks. Rejects primitives that are not strictly in front
/// of camera t.
GroundTruth generate(const SceneSpec& spec);

/// Relative pose mapping camera t+1 coordinates into camera t coordinates.
RigidTransform relative_pose(const SceneSpec& spec);

/// 352x1216 stereo-like scene: 10..50 textured rectangles over a background
/// plane at 80 m, all depths within (1, 80], lateral baseline.
SceneSpec kitti_like_spec(std::uint64_t seed);

/// Small scene with exclusively smooth textures and gentle motion, suitable
/// for finite-difference gradient checks.
SceneSpec smooth_scene_spec(std::uint64_t seed, int width = 32, int height = 32);

/// Small scene with mixed textures, layered occluders and a lateral
/// baseline.
SceneSpec random_scene_spec(std::uint64_t seed, int width = 48, int height = 32);

/// random_scene_spec with camera t+1 moved onto camera t (identity relative
/// pose), for exactness-at-truth checks.
SceneSpec identity_scene_spec(std::uint64_t seed, int width = 48, int height = 32);

/// 64x64 two-plane scene with a pure lateral baseline chosen so both planes
/// shift by an exact integer pixel count, giving the occlusion band a
/// closed form. Near plane at 5 m (shift 4 px), far plane at 10 m (shift
/// 2 px), baseline +0.4 m.
SceneSpec two_plane_occlusion_spec();

/// Seeded variant of the layered-occluder construction guaranteed to
/// produce a nonempty occlusion band.
SceneSpec occlusion_scene_spec(std::uint64_t seed);

/// Camera t+1 pushed forward past a small near rectangle, so the
/// rectangle's points get negative depth in frame t+1 while still
/// projecting inside it. Every rectangle pixel lands in the negative set
/// with |depth| exactly 0.5.
SceneSpec negative_depth_spec();

/// Single fronto-parallel plane at 10 m with an integer-pixel lateral
/// shift. Depth noise up to 0.05 m cannot move any projection across a
/// raster cell edge, so the z-buffer keeps every truly visible point while
/// the minimum-depth heuristic (tolerance 0) trips over the noise.
SceneSpec heuristic_noise_spec();

/// Uniform noise in [-amplitude, +amplitude] on valid pixels, clamped to
/// stay strictly positive. Deterministic in the seed.
DepthMap perturb_depth(const DepthMap& depth, double amplitude,
                       std::uint64_t seed);

/// Perturbs gt.depth_t.
DepthMap perturb_depth(const GroundTruth& gt, double amplitude,
                       std::uint64_t seed);

/// Assembles the loss problem the harness runs on a generated scene:
/// rendered images, (optionally noise-perturbed) depths and the relative
/// pose. Requires both cameras to share one Intrinsics.
LossProblem scene_problem(const SceneSpec& spec, const GroundTruth& gt,
                          const LossWeights& weights, OcclusionMode occlusion,
                          double heuristic_tolerance = 0.0,
                          double noise_amplitude = 0.0);

}  // namespace reproj
