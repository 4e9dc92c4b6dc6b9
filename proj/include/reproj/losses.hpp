#pragma once

#include "reproj/types.hpp"
#include "reproj/zbuffer.hpp"

#include <cstdint>
#include <vector>

namespace reproj {

/// Relative weights of the four loss terms. Defaults put the terms on
/// roughly the same scale for KITTI-like frames.
struct LossWeights {
  double point = 0.005;           // lambda1
  double image = 10.0;            // lambda2
  double ssim = 2.0;              // lambda3
  double negative_depth = 2.0;    // lambda4

  static LossWeights zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

/// Per-term values plus how many elements contributed to each. Point, image
/// and SSIM terms are means over their contributors (so frame size does not
/// rescale them); the negative-depth term is a raw sum. A term with no
/// contributors is 0.
struct LossBreakdown {
  double point = 0.0;
  double image = 0.0;
  double ssim = 0.0;
  double negative_depth = 0.0;
  double total = 0.0;

  struct Counts {
    std::size_t point_cells = 0;
    std::size_t image_points = 0;
    std::size_t ssim_patches = 0;
    std::size_t negative_points = 0;
  } contributing;
};

enum class OcclusionMode { None, ZBuffer, Heuristic };

/// One observed frame: RGB image plus (predicted) depth.
struct FrameObservation {
  Image image;
  DepthMap depth;
};

/// Everything total_loss needs, bundled so the gradient and checking code
/// can rerun the identical problem.
struct LossProblem {
  FrameObservation frame_t;
  FrameObservation frame_t1;
  RigidTransform pose;  // maps frame t+1 camera coordinates into frame t
  Intrinsics intrinsics;
  LossWeights weights;
  OcclusionMode occlusion = OcclusionMode::ZBuffer;
  double heuristic_tolerance = 0.0;
  ZBufferOptions zbuffer_options;
};

/// Mean L1 distance between registered 3-vectors over cells populated in
/// both grids; 0 when no cell overlaps.
double point_loss(const Registration& reg_hat, const Registration& reg);

/// Mean, over visible points, of the per-channel L1 difference between the
/// target image sampled bilinearly at the point's continuous projection and
/// the source image at the point's origin pixel. visible is a per-point mask
/// and must select only InFramePositive points.
double reconstruct_and_image_loss(const Image& target_image,
                                  const Image& source_image,
                                  const PointCloud& cloud,
                                  const ProjectionOutcome& outcome,
                                  const std::vector<std::uint8_t>& visible);

/// Mean of (1 - SSIM) over all 3x3 patches lying fully inside the frame with
/// all nine recon cells populated. SSIM uses a uniform 3x3 window, constants
/// C1 = 0.01^2 and C2 = 0.03^2 at dynamic range 1, computed per channel and
/// averaged over channels.
double ssim_loss(const Image& recon, const Image& target,
                 const std::vector<std::uint8_t>& populated);

/// Sum of |depth| over points classified NegativeInFrame.
double negative_depth_loss(const ProjectionOutcome& outcome);

/// Evaluates the full pipeline in both directions (t -> t+1 under the
/// inverse pose, t+1 -> t under the pose), applying the principled mask, the
/// negative-in-frame exclusion and the selected occlusion mode, then sums
/// each term over the two directions and combines them with the weights.
LossBreakdown total_loss(const LossProblem& problem);

LossBreakdown total_loss(const FrameObservation& frame_t,
                         const FrameObservation& frame_t1,
                         const RigidTransform& pose, const Intrinsics& intr,
                         const LossWeights& weights,
                         OcclusionMode occlusion = OcclusionMode::ZBuffer,
                         double heuristic_tolerance = 0.0,
                         const ZBufferOptions& zopts = {});

}  // namespace reproj
