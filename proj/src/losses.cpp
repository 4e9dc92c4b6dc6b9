#include "reproj/losses.hpp"

#include "reproj/pipeline.hpp"

namespace reproj {

double point_loss(const Registration& reg_hat, const Registration& reg) {
  return detail::point_loss_impl(reg_hat, reg, nullptr, nullptr);
}

double reconstruct_and_image_loss(const Image& target_image,
                                  const Image& source_image,
                                  const PointCloud& cloud,
                                  const ProjectionOutcome& outcome,
                                  const std::vector<std::uint8_t>& visible) {
  return detail::image_loss_impl(target_image, source_image, cloud, outcome,
                                 visible, nullptr, nullptr);
}

double ssim_loss(const Image& recon, const Image& target,
                 const std::vector<std::uint8_t>& populated) {
  return detail::ssim_loss_impl(recon, target, populated, nullptr);
}

double negative_depth_loss(const ProjectionOutcome& outcome) {
  return detail::negative_depth_loss_impl(outcome, nullptr, nullptr);
}

LossBreakdown total_loss(const LossProblem& problem) {
  return evaluate_pipeline(problem).breakdown;
}

LossBreakdown total_loss(const FrameObservation& frame_t,
                         const FrameObservation& frame_t1,
                         const RigidTransform& pose, const Intrinsics& intr,
                         const LossWeights& weights, OcclusionMode occlusion,
                         double heuristic_tolerance,
                         const ZBufferOptions& zopts) {
  return total_loss(LossProblem{frame_t, frame_t1, pose, intr, weights,
                                occlusion, heuristic_tolerance, zopts});
}

}  // namespace reproj
