#include "reproj/scene.hpp"

#include "reproj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace reproj {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic uniform draws built from raw mt19937_64 output, so results
// do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = (engine_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::min(hi, lo + static_cast<int>(uniform(0.0, hi - lo + 1.0)));
  }

  bool coin() { return (engine_() & 1) != 0; }

 private:
  std::mt19937_64 engine_;
};

std::array<double, 3> texture_color(const Texture& tex, double x, double y) {
  switch (tex.kind) {
    case TextureKind::Constant:
      return tex.base;
    case TextureKind::SmoothGradient: {
      std::array<double, 3> c;
      for (int k = 0; k < 3; ++k) {
        const double phase = tex.phase + k * (2.0 * kPi / 3.0);
        c[k] = tex.base[k] +
               tex.amplitude[k] *
                   std::sin(2.0 * kPi * (tex.freq_x * x + tex.freq_y * y) + phase);
      }
      return c;
    }
    case TextureKind::Checkerboard: {
      const long long px = static_cast<long long>(std::floor(x / tex.tile));
      const long long py = static_cast<long long>(std::floor(y / tex.tile));
      return ((px + py) & 1) == 0 ? tex.base : tex.alt;
    }
  }
  return tex.base;
}

struct Hit {
  double depth = std::numeric_limits<double>::infinity();  // camera-frame z
  double world_x = 0.0;
  double world_y = 0.0;
  int primitive = -1;
};

// Casts the ray of pixel (i, j) and keeps the nearest primitive. The ray
// parameter equals camera depth because the pixel direction has unit z.
Hit cast_pixel(const SceneSpec& spec, const CameraRig& rig, int i, int j) {
  const Intrinsics& intr = rig.intrinsics;
  const Vec3 q((i - intr.cx) / intr.fx, (j - intr.cy) / intr.fy, 1.0);
  const RigidTransform camera_to_world = invert(rig.world_to_camera);
  const Vec3 origin = camera_to_world.translation;
  const Vec3 dir = rig.world_to_camera.rotation.transpose() * q;

  Hit best;
  for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
    const Primitive& prim = spec.primitives[k];
    if (dir.z() == 0.0) continue;
    const double s = (prim.z - origin.z()) / dir.z();
    if (s <= 0.0 || s >= best.depth) continue;
    const double hx = origin.x() + s * dir.x();
    const double hy = origin.y() + s * dir.y();
    if (!prim.infinite &&
        (hx < prim.x0 || hx > prim.x1 || hy < prim.y0 || hy > prim.y1))
      continue;
    best = Hit{s, hx, hy, static_cast<int>(k)};
  }
  return best;
}

void render_rig(const SceneSpec& spec, const CameraRig& rig, DepthMap& depth,
                Image& image) {
  const Intrinsics& intr = rig.intrinsics;
  for (int j = 0; j < intr.height; ++j) {
    for (int i = 0; i < intr.width; ++i) {
      const Hit hit = cast_pixel(spec, rig, i, j);
      if (hit.primitive < 0) continue;
      depth.set(i, j, hit.depth);
      const auto c =
          texture_color(spec.primitives[hit.primitive].texture, hit.world_x,
                        hit.world_y);
      image.set(i, j, std::clamp(c[0], 0.0, 1.0), std::clamp(c[1], 0.0, 1.0),
                std::clamp(c[2], 0.0, 1.0));
    }
  }
}

void check_primitives_in_front(const SceneSpec& spec) {
  const RigidTransform& w2c = spec.camera_t.world_to_camera;
  const Vec3 cam_pos = invert(w2c).translation;
  for (const Primitive& prim : spec.primitives) {
    if (prim.infinite) {
      if (!(prim.z > cam_pos.z()))
        throw InvalidInput("scene: infinite primitive not in front of camera t");
      continue;
    }
    for (const double x : {prim.x0, prim.x1}) {
      for (const double y : {prim.y0, prim.y1}) {
        if (!(w2c.apply(Vec3(x, y, prim.z)).z() > 0.0))
          throw InvalidInput("scene: primitive corner behind camera t");
      }
    }
  }
}

Texture random_texture(Rng& rng, bool smooth_only) {
  Texture tex;
  const int kind = smooth_only ? 1 : rng.uniform_int(0, 2);
  if (kind == 0) {
    tex.kind = TextureKind::Constant;
    for (auto& b : tex.base) b = rng.uniform(0.1, 0.9);
  } else if (kind == 1) {
    tex.kind = TextureKind::SmoothGradient;
    for (int k = 0; k < 3; ++k) {
      tex.base[k] = rng.uniform(0.35, 0.65);
      tex.amplitude[k] = rng.uniform(0.1, 0.3);
    }
    tex.freq_x = rng.uniform(0.02, 0.25);
    tex.freq_y = rng.uniform(0.02, 0.25);
    tex.phase = rng.uniform(0.0, 2.0 * kPi);
  } else {
    tex.kind = TextureKind::Checkerboard;
    for (int k = 0; k < 3; ++k) {
      tex.base[k] = rng.uniform(0.05, 0.45);
      tex.alt[k] = rng.uniform(0.55, 0.95);
    }
    tex.tile = rng.uniform(0.3, 2.0);
  }
  return tex;
}

RigidTransform camera_at(const Vec3& position) {
  return RigidTransform(Mat3::Identity(), -position);
}

}  // namespace

std::size_t GroundTruth::visible_count() const {
  std::size_t n = 0;
  for (auto v : visible_t_to_t1) n += v != 0;
  return n;
}

std::size_t GroundTruth::negative_count() const {
  std::size_t n = 0;
  for (auto v : negative_t_to_t1) n += v != 0;
  return n;
}

RigidTransform relative_pose(const SceneSpec& spec) {
  return compose(spec.camera_t.world_to_camera,
                 invert(spec.camera_t1.world_to_camera));
}

GroundTruth generate(const SceneSpec& spec) {
  if (spec.primitives.empty())
    throw InvalidInput("scene: at least one primitive required");
  if (spec.noise_amplitude < 0.0)
    throw InvalidInput("scene: noise amplitude must be nonnegative");
  check_primitives_in_front(spec);

  const Intrinsics& intr_t = spec.camera_t.intrinsics;
  const Intrinsics& intr_t1 = spec.camera_t1.intrinsics;

  GroundTruth gt{DepthMap(intr_t.height, intr_t.width),
                 DepthMap(intr_t1.height, intr_t1.width),
                 Image(intr_t.height, intr_t.width),
                 Image(intr_t1.height, intr_t1.width),
                 std::vector<std::uint8_t>(intr_t.pixel_count(), 0),
                 std::vector<std::uint8_t>(intr_t.pixel_count(), 0)};

  render_rig(spec, spec.camera_t, gt.depth_t, gt.image_t);
  render_rig(spec, spec.camera_t1, gt.depth_t1, gt.image_t1);

  // Analytic t -> t+1 masks. The arithmetic below deliberately mirrors the
  // pipeline's inverse-projection / transform / projection expressions, so
  // the masks are comparable bit-for-bit with its classification; the
  // per-cell minimum implements the raster notion of occlusion (two points
  // colliding on one pixel of frame t+1) without any z-buffer machinery.
  const RigidTransform t_to_t1 = invert(relative_pose(spec));
  std::vector<double> cell_min(intr_t1.pixel_count(),
                               std::numeric_limits<double>::infinity());
  std::vector<double> depth_in_t1(intr_t.pixel_count(), 0.0);
  std::vector<std::int64_t> cell_of(intr_t.pixel_count(), -1);

  for (int j = 0; j < intr_t.height; ++j) {
    for (int i = 0; i < intr_t.width; ++i) {
      const std::size_t pix = gt.depth_t.index(i, j);
      if (!gt.depth_t.is_valid(i, j)) continue;
      const double d = gt.depth_t.at(i, j);
      const Vec3 p((i - intr_t.cx) * d / intr_t.fx,
                   (j - intr_t.cy) * d / intr_t.fy, d);
      const Vec3 c1 = t_to_t1.apply(p);
      depth_in_t1[pix] = c1.z();
      if (c1.z() == 0.0) continue;  // projection undefined: out of frame
      const double u = intr_t1.fx * c1.x() / c1.z() + intr_t1.cx;
      const double v = intr_t1.fy * c1.y() / c1.z() + intr_t1.cy;
      const double ru = round_pixel(u);
      const double rv = round_pixel(v);
      if (ru < 0.0 || ru >= intr_t1.width || rv < 0.0 || rv >= intr_t1.height)
        continue;
      const std::size_t cell = static_cast<std::size_t>(rv) * intr_t1.width +
                               static_cast<std::size_t>(ru);
      if (c1.z() < 0.0) {
        gt.negative_t_to_t1[pix] = 1;
        continue;
      }
      cell_of[pix] = static_cast<std::int64_t>(cell);
      cell_min[cell] = std::min(cell_min[cell], c1.z());
    }
  }
  for (std::size_t pix = 0; pix < cell_of.size(); ++pix) {
    if (cell_of[pix] < 0) continue;
    gt.visible_t_to_t1[pix] =
        depth_in_t1[pix] == cell_min[static_cast<std::size_t>(cell_of[pix])] ? 1
                                                                             : 0;
  }
  return gt;
}

SceneSpec kitti_like_spec(std::uint64_t seed) {
  Rng rng(seed);
  SceneSpec spec;
  spec.seed = seed;

  const Intrinsics intr(720.0, 720.0, 607.5, 175.5, 1216, 352);
  spec.camera_t = {intr, RigidTransform::identity()};
  // Stereo-like lateral baseline to the left, plus a touch of forward
  // motion; this write order makes far points win early z-buffer rounds, so
  // repair kicks in on the occlusion bands.
  const double bx = -0.54;
  const double bz = rng.uniform(0.0, 0.25);
  spec.camera_t1 = {intr, camera_at(Vec3(bx, 0.0, bz))};

  Primitive background;
  background.z = 80.0;
  background.infinite = true;
  background.texture = random_texture(rng, false);
  spec.primitives.push_back(background);

  const int count = rng.uniform_int(10, 50);
  for (int k = 0; k < count; ++k) {
    Primitive prim;
    prim.z = rng.uniform(2.0, 75.0);
    const double half_x = prim.z * (intr.width / 2.0) / intr.fx;
    const double half_y = prim.z * (intr.height / 2.0) / intr.fy;
    const double sx = rng.uniform(0.1, 0.5) * half_x;
    const double sy = rng.uniform(0.15, 0.6) * half_y;
    const double cx = rng.uniform(-0.85, 0.85) * half_x;
    const double cy = rng.uniform(-0.8, 0.8) * half_y;
    prim.x0 = cx - sx;
    prim.x1 = cx + sx;
    prim.y0 = cy - sy;
    prim.y1 = cy + sy;
    prim.texture = random_texture(rng, false);
    spec.primitives.push_back(prim);
  }
  return spec;
}

SceneSpec smooth_scene_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  SceneSpec spec;
  spec.seed = seed;

  const Intrinsics intr(0.8 * width, 0.8 * width, (width - 1) / 2.0,
                        (height - 1) / 2.0, width, height);
  spec.camera_t = {intr, RigidTransform::identity()};

  const double angle = rng.uniform(-0.02, 0.02);
  Vec3 axis(rng.uniform(-0.3, 0.3), 1.0, rng.uniform(-0.3, 0.3));
  const Mat3 rot =
      Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  const Vec3 position(rng.uniform(-0.25, 0.25), rng.uniform(-0.06, 0.06),
                      rng.uniform(-0.12, 0.12));
  spec.camera_t1 = {intr, RigidTransform(rot.transpose(),
                                         -(rot.transpose() * position))};

  Primitive background;
  background.z = rng.uniform(10.0, 14.0);
  background.infinite = true;
  background.texture = random_texture(rng, true);
  spec.primitives.push_back(background);

  const int count = rng.uniform_int(2, 4);
  for (int k = 0; k < count; ++k) {
    Primitive prim;
    prim.z = rng.uniform(3.0, 9.0);
    const double half_x = prim.z * (width / 2.0) / intr.fx;
    const double half_y = prim.z * (height / 2.0) / intr.fy;
    const double sx = rng.uniform(0.15, 0.45) * half_x;
    const double sy = rng.uniform(0.15, 0.45) * half_y;
    const double cx = rng.uniform(-0.7, 0.7) * half_x;
    const double cy = rng.uniform(-0.7, 0.7) * half_y;
    prim.x0 = cx - sx;
    prim.x1 = cx + sx;
    prim.y0 = cy - sy;
    prim.y1 = cy + sy;
    prim.texture = random_texture(rng, true);
    spec.primitives.push_back(prim);
  }
  return spec;
}

SceneSpec random_scene_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  SceneSpec spec = smooth_scene_spec(seed, width, height);
  for (auto& prim : spec.primitives)
    prim.texture = random_texture(rng, false);
  // Stronger lateral baseline so occlusion bands actually appear.
  const double bx = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.25, 0.6);
  spec.camera_t1.world_to_camera =
      camera_at(Vec3(bx, rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.2)));
  return spec;
}

SceneSpec identity_scene_spec(std::uint64_t seed, int width, int height) {
  SceneSpec spec = random_scene_spec(seed, width, height);
  spec.camera_t1 = spec.camera_t;
  return spec;
}

SceneSpec two_plane_occlusion_spec() {
  SceneSpec spec;
  const Intrinsics intr(50.0, 50.0, 31.5, 31.5, 64, 64);
  spec.camera_t = {intr, RigidTransform::identity()};
  spec.camera_t1 = {intr, camera_at(Vec3(0.4, 0.0, 0.0))};

  Primitive far_plane;
  far_plane.z = 10.0;
  far_plane.infinite = true;
  far_plane.texture.kind = TextureKind::SmoothGradient;
  far_plane.texture.base = {0.5, 0.45, 0.4};
  far_plane.texture.amplitude = {0.2, 0.2, 0.2};
  far_plane.texture.freq_x = 0.1;
  far_plane.texture.freq_y = 0.07;
  spec.primitives.push_back(far_plane);

  Primitive near_rect;
  near_rect.z = 5.0;
  near_rect.x0 = -1.0;
  near_rect.x1 = 0.4;
  near_rect.y0 = -1.5;
  near_rect.y1 = 1.5;
  near_rect.texture.kind = TextureKind::SmoothGradient;
  near_rect.texture.base = {0.4, 0.55, 0.6};
  near_rect.texture.amplitude = {0.25, 0.2, 0.15};
  near_rect.texture.freq_x = 0.15;
  near_rect.texture.freq_y = 0.11;
  spec.primitives.push_back(near_rect);
  return spec;
}

SceneSpec occlusion_scene_spec(std::uint64_t seed) {
  Rng rng(seed * 0x2545f4914f6cdd1dull + 1);
  SceneSpec spec;
  spec.seed = seed;
  const Intrinsics intr(50.0, 50.0, 31.5, 31.5, 64, 64);
  spec.camera_t = {intr, RigidTransform::identity()};
  const double bx = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.25, 0.6);
  spec.camera_t1 = {intr, camera_at(Vec3(bx, 0.0, 0.0))};

  Primitive background;
  background.z = rng.uniform(12.0, 20.0);
  background.infinite = true;
  background.texture = random_texture(rng, false);
  spec.primitives.push_back(background);

  // A central stack of layered occluders: every lateral baseline leaves part
  // of each deeper layer hidden behind a shallower one.
  const int layers = rng.uniform_int(2, 4);
  for (int k = 0; k < layers; ++k) {
    Primitive prim;
    prim.z = 3.0 + 2.0 * k + rng.uniform(0.0, 1.0);
    const double half_x = prim.z * 32.0 / intr.fx;
    const double half_y = prim.z * 32.0 / intr.fy;
    prim.x0 = -rng.uniform(0.3, 0.5) * half_x + 0.1 * k;
    prim.x1 = rng.uniform(0.3, 0.5) * half_x + 0.1 * k;
    prim.y0 = -rng.uniform(0.4, 0.7) * half_y;
    prim.y1 = rng.uniform(0.4, 0.7) * half_y;
    prim.texture = random_texture(rng, false);
    spec.primitives.push_back(prim);
  }
  return spec;
}

SceneSpec negative_depth_spec() {
  SceneSpec spec;
  const Intrinsics intr(50.0, 50.0, 31.5, 31.5, 64, 64);
  spec.camera_t = {intr, RigidTransform::identity()};
  // Camera t+1 sits past the near rectangle: its points end up behind the
  // new image plane (depth 2.0 - 2.5 = -0.5) yet still project in frame.
  spec.camera_t1 = {intr, camera_at(Vec3(0.0, 0.0, 2.5))};

  Primitive background;
  background.z = 30.0;
  background.infinite = true;
  background.texture.kind = TextureKind::SmoothGradient;
  background.texture.base = {0.5, 0.5, 0.55};
  background.texture.amplitude = {0.2, 0.15, 0.1};
  background.texture.freq_x = 0.02;
  background.texture.freq_y = 0.03;
  spec.primitives.push_back(background);

  Primitive squeezed;
  squeezed.z = 2.0;
  squeezed.x0 = -0.24;
  squeezed.x1 = 0.24;
  squeezed.y0 = -0.24;
  squeezed.y1 = 0.24;
  squeezed.texture.kind = TextureKind::Constant;
  squeezed.texture.base = {0.8, 0.3, 0.2};
  spec.primitives.push_back(squeezed);
  return spec;
}

SceneSpec heuristic_noise_spec() {
  SceneSpec spec;
  const Intrinsics intr(50.0, 50.0, 31.5, 31.5, 64, 64);
  spec.camera_t = {intr, RigidTransform::identity()};
  spec.camera_t1 = {intr, camera_at(Vec3(0.4, 0.0, 0.0))};

  Primitive plane;
  plane.z = 10.0;  // lateral shift exactly 50 * 0.4 / 10 = 2 px
  plane.infinite = true;
  plane.texture.kind = TextureKind::SmoothGradient;
  plane.texture.base = {0.5, 0.5, 0.5};
  plane.texture.amplitude = {0.25, 0.25, 0.25};
  plane.texture.freq_x = 0.12;
  plane.texture.freq_y = 0.09;
  spec.primitives.push_back(plane);
  return spec;
}

DepthMap perturb_depth(const DepthMap& depth, double amplitude,
                       std::uint64_t seed) {
  if (amplitude < 0.0)
    throw InvalidInput("perturb_depth: amplitude must be nonnegative");
  if (amplitude == 0.0) return depth;
  Rng rng(seed);
  DepthMap out = depth;
  for (int j = 0; j < depth.height(); ++j) {
    for (int i = 0; i < depth.width(); ++i) {
      if (!depth.is_valid(i, j)) continue;
      const double noisy =
          depth.at(i, j) + rng.uniform(-amplitude, amplitude);
      out.set(i, j, std::max(noisy, 1e-9));
    }
  }
  return out;
}

DepthMap perturb_depth(const GroundTruth& gt, double amplitude,
                       std::uint64_t seed) {
  return perturb_depth(gt.depth_t, amplitude, seed);
}

LossProblem scene_problem(const SceneSpec& spec, const GroundTruth& gt,
                          const LossWeights& weights, OcclusionMode occlusion,
                          double heuristic_tolerance, double noise_amplitude) {
  const Intrinsics& a = spec.camera_t.intrinsics;
  const Intrinsics& b = spec.camera_t1.intrinsics;
  if (a.width != b.width || a.height != b.height || a.fx != b.fx ||
      a.fy != b.fy || a.cx != b.cx || a.cy != b.cy)
    throw InvalidInput("scene_problem: cameras must share one Intrinsics");

  LossProblem problem{
      FrameObservation{gt.image_t, noise_amplitude > 0.0
                                       ? perturb_depth(gt.depth_t,
                                                       noise_amplitude, spec.seed)
                                       : gt.depth_t},
      FrameObservation{gt.image_t1,
                       noise_amplitude > 0.0
                           ? perturb_depth(gt.depth_t1, noise_amplitude,
                                           spec.seed + 1)
                           : gt.depth_t1},
      relative_pose(spec),
      a,
      weights,
      occlusion,
      heuristic_tolerance,
      {}};
  return problem;
}

}  // namespace reproj
