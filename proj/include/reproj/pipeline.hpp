#pragma once

#include "reproj/geometry.hpp"
#include "reproj/losses.hpp"
#include "reproj/zbuffer.hpp"

#include <cstdint>
#include <vector>

namespace reproj {

/// Bilinear sample of an image at a continuous coordinate, with the partial
/// derivatives of the sampled value in u and v. Taps that overhang the frame
/// are clamped to the border.
struct BilinearSample {
  Vec3 value;
  Vec3 du;
  Vec3 dv;
};

BilinearSample sample_bilinear(const Image& image, double u, double v);

/// Exclusion bookkeeping for one warp direction.
struct DirectionStats {
  std::size_t total_points = 0;
  std::size_t out_of_frame = 0;
  std::size_t negative_in_frame = 0;
  std::size_t in_frame_positive = 0;
  /// In-frame positive points removed by the occlusion mode.
  std::size_t occlusion_excluded = 0;
  /// Rounds the z-buffer ran; 0 unless the mode is ZBuffer.
  int zbuffer_iterations = 0;
  std::vector<std::size_t> zbuffer_pending_per_round;
};

/// Everything one warp direction produces: the transformed cloud, its
/// projection, the visible mask, both registrations, the splat raster the
/// SSIM term sees, the per-term values and the contributor counts.
///
/// The sign vectors record the subgradient selections of the absolute values
/// inside the terms (point residuals per overlapping cell in cell order,
/// image residuals per visible point in point order, negative depths in
/// point order). Together with statuses, raster indices, visibility and cell
/// winners they make up the discrete state a finite-difference probe must
/// hold fixed.
struct DirectionEval {
  DirectionEval(int height, int width);

  PointCloud transformed;
  ProjectionOutcome outcome;
  std::vector<std::uint8_t> visible;  // per point of the transformed cloud
  Registration reg_hat;
  Registration reg_target;
  Image recon;
  std::vector<std::uint8_t> recon_populated;
  std::vector<std::int32_t> cell_winner;  // per target cell; -1 when empty

  DirectionStats stats;

  double point_term = 0.0;
  double image_term = 0.0;
  double ssim_term = 0.0;
  double nd_term = 0.0;
  LossBreakdown::Counts counts;

  std::vector<std::int8_t> point_signs;
  std::vector<std::int8_t> image_signs;
  std::vector<std::int8_t> nd_signs;
};

/// Runs one direction of the pipeline: inverse-project the source depth,
/// transform into the target frame, project, classify, resolve occlusion,
/// register, splat, and evaluate all four terms.
DirectionEval evaluate_direction(const FrameObservation& target,
                                 const FrameObservation& source,
                                 const RigidTransform& source_to_target,
                                 const Intrinsics& intr,
                                 OcclusionMode occlusion,
                                 double heuristic_tolerance,
                                 const ZBufferOptions& zopts);

struct PipelineResult {
  DirectionEval t1_to_t;  // reconstructs frame t from frame t+1
  DirectionEval t_to_t1;  // reconstructs frame t+1 from frame t
  LossBreakdown breakdown;
};

PipelineResult evaluate_pipeline(const LossProblem& problem);

/// The discrete selections of one pipeline evaluation, comparable for
/// equality. A finite-difference probe is only meaningful while this state
/// is unchanged.
struct DiscreteState {
  std::vector<std::int64_t> raster;
  std::vector<std::uint8_t> status;
  std::vector<std::uint8_t> visible;
  std::vector<std::int32_t> winners;
  std::vector<std::int8_t> signs;

  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
};

DiscreteState discrete_state(const PipelineResult& result);

namespace detail {

double point_loss_impl(const Registration& reg_hat, const Registration& reg,
                       std::size_t* count, std::vector<std::int8_t>* signs);

double image_loss_impl(const Image& target_image, const Image& source_image,
                       const PointCloud& cloud,
                       const ProjectionOutcome& outcome,
                       const std::vector<std::uint8_t>& visible,
                       std::size_t* count, std::vector<std::int8_t>* signs);

double ssim_loss_impl(const Image& recon, const Image& target,
                      const std::vector<std::uint8_t>& populated,
                      std::size_t* count);

double negative_depth_loss_impl(const ProjectionOutcome& outcome,
                                std::size_t* count,
                                std::vector<std::int8_t>* signs);

}  // namespace detail

}  // namespace reproj
