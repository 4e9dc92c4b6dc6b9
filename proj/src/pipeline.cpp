#include "reproj/pipeline.hpp"

#include "reproj/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace reproj {

namespace {

inline int clamp_tap(int x, int hi) { return std::clamp(x, 0, hi); }

void check_frame(const FrameObservation& frame, const Intrinsics& intr,
                 const char* which) {
  if (frame.image.width() != intr.width || frame.image.height() != intr.height ||
      frame.depth.width() != intr.width || frame.depth.height() != intr.height)
    throw InvalidInput(std::string("total_loss: ") + which +
                       " frame dimensions do not match intrinsics");
}

}  // namespace

BilinearSample sample_bilinear(const Image& image, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double au = u - fu;
  const double av = v - fv;
  const int i0 = clamp_tap(static_cast<int>(fu), image.width() - 1);
  const int i1 = clamp_tap(static_cast<int>(fu) + 1, image.width() - 1);
  const int j0 = clamp_tap(static_cast<int>(fv), image.height() - 1);
  const int j1 = clamp_tap(static_cast<int>(fv) + 1, image.height() - 1);

  BilinearSample s;
  for (int c = 0; c < 3; ++c) {
    const double p00 = image.at(i0, j0, c);
    const double p10 = image.at(i1, j0, c);
    const double p01 = image.at(i0, j1, c);
    const double p11 = image.at(i1, j1, c);
    s.value[c] = (1.0 - au) * (1.0 - av) * p00 + au * (1.0 - av) * p10 +
                 (1.0 - au) * av * p01 + au * av * p11;
    s.du[c] = (1.0 - av) * (p10 - p00) + av * (p11 - p01);
    s.dv[c] = (1.0 - au) * (p01 - p00) + au * (p11 - p10);
  }
  return s;
}

namespace detail {

double point_loss_impl(const Registration& reg_hat, const Registration& reg,
                       std::size_t* count, std::vector<std::int8_t>* signs) {
  if (reg_hat.width() != reg.width() || reg_hat.height() != reg.height())
    throw InvalidInput("point_loss: registration dimensions differ");
  KahanSum sum;
  std::size_t cells = 0;
  for (std::size_t c = 0; c < reg.cell_count(); ++c) {
    if (!reg_hat.populated_at(c) || !reg.populated_at(c)) continue;
    const Vec3 delta = reg_hat.coords_at(c) - reg.coords_at(c);
    for (int k = 0; k < 3; ++k) {
      sum.add(std::abs(delta[k]));
      if (signs) signs->push_back(static_cast<std::int8_t>(sign(delta[k])));
    }
    ++cells;
  }
  if (count) *count = cells;
  return cells == 0 ? 0.0 : sum.value() / static_cast<double>(cells);
}

double image_loss_impl(const Image& target_image, const Image& source_image,
                       const PointCloud& cloud,
                       const ProjectionOutcome& outcome,
                       const std::vector<std::uint8_t>& visible,
                       std::size_t* count, std::vector<std::int8_t>* signs) {
  if (outcome.size() != cloud.size() || visible.size() != cloud.size())
    throw InvalidInput("image_loss: visible mask does not match the cloud");
  KahanSum sum;
  std::size_t contributors = 0;
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    if (!visible[p]) continue;
    if (outcome.status[p] != PointStatus::InFramePositive)
      throw InvalidInput("image_loss: visible mask selects a masked-out point");
    const BilinearSample s =
        sample_bilinear(target_image, outcome.u[p], outcome.v[p]);
    const auto [i, j] = cloud.source_pixels()[p];
    for (int c = 0; c < 3; ++c) {
      const double r = s.value[c] - source_image.at(i, j, c);
      sum.add(std::abs(r));
      if (signs) signs->push_back(static_cast<std::int8_t>(sign(r)));
    }
    ++contributors;
  }
  if (count) *count = contributors;
  return contributors == 0 ? 0.0 : sum.value() / static_cast<double>(contributors);
}

double ssim_loss_impl(const Image& recon, const Image& target,
                      const std::vector<std::uint8_t>& populated,
                      std::size_t* count) {
  if (recon.width() != target.width() || recon.height() != target.height())
    throw InvalidInput("ssim_loss: image dimensions differ");
  if (populated.size() != static_cast<std::size_t>(recon.width()) * recon.height())
    throw InvalidInput("ssim_loss: populated mask does not match the frame");

  constexpr double kC1 = 0.01 * 0.01;  // dynamic range 1
  constexpr double kC2 = 0.03 * 0.03;

  KahanSum sum;
  std::size_t patches = 0;
  for (int cj = 1; cj + 1 < recon.height(); ++cj) {
    for (int ci = 1; ci + 1 < recon.width(); ++ci) {
      bool full = true;
      for (int dj = -1; dj <= 1 && full; ++dj)
        for (int di = -1; di <= 1; ++di)
          if (!populated[static_cast<std::size_t>(cj + dj) * recon.width() +
                         (ci + di)]) {
            full = false;
            break;
          }
      if (!full) continue;

      double ssim_rgb = 0.0;
      for (int c = 0; c < 3; ++c) {
        double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const double x = recon.at(ci + di, cj + dj, c);
            const double y = target.at(ci + di, cj + dj, c);
            mx += x;
            my += y;
            mxx += x * x;
            myy += y * y;
            mxy += x * y;
          }
        }
        mx /= 9.0;
        my /= 9.0;
        const double vx = mxx / 9.0 - mx * mx;
        const double vy = myy / 9.0 - my * my;
        const double cov = mxy / 9.0 - mx * my;
        ssim_rgb += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
                    ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      }
      sum.add(1.0 - ssim_rgb / 3.0);
      ++patches;
    }
  }
  if (count) *count = patches;
  return patches == 0 ? 0.0 : sum.value() / static_cast<double>(patches);
}

double negative_depth_loss_impl(const ProjectionOutcome& outcome,
                                std::size_t* count,
                                std::vector<std::int8_t>* signs) {
  KahanSum sum;
  std::size_t members = 0;
  for (std::size_t p = 0; p < outcome.size(); ++p) {
    if (outcome.status[p] != PointStatus::NegativeInFrame) continue;
    sum.add(std::abs(outcome.depth[p]));
    if (signs)
      signs->push_back(static_cast<std::int8_t>(sign(outcome.depth[p])));
    ++members;
  }
  if (count) *count = members;
  return sum.value();
}

}  // namespace detail

DirectionEval::DirectionEval(int height, int width)
    : transformed(PointCloud::empty(width, height)),
      reg_hat(height, width),
      reg_target(height, width),
      recon(height, width),
      recon_populated(static_cast<std::size_t>(height) * width, 0),
      cell_winner(static_cast<std::size_t>(height) * width, -1) {}

DirectionEval evaluate_direction(const FrameObservation& target,
                                 const FrameObservation& source,
                                 const RigidTransform& source_to_target,
                                 const Intrinsics& intr,
                                 OcclusionMode occlusion,
                                 double heuristic_tolerance,
                                 const ZBufferOptions& zopts) {
  DirectionEval eval(intr.height, intr.width);
  eval.transformed =
      transform(inverse_project(source.depth, intr), source_to_target);
  eval.outcome = project(eval.transformed, intr);

  const std::size_t n = eval.transformed.size();
  eval.stats.total_points = n;
  eval.stats.out_of_frame = eval.outcome.count(PointStatus::OutOfFrame);
  eval.stats.negative_in_frame =
      eval.outcome.count(PointStatus::NegativeInFrame);

  const InFrameSubset subset = in_frame_positive_subset(eval.outcome);
  eval.stats.in_frame_positive = subset.size();

  eval.visible.assign(n, 0);
  std::vector<std::uint8_t> subset_visible;
  switch (occlusion) {
    case OcclusionMode::None:
      subset_visible.assign(subset.size(), 1);
      break;
    case OcclusionMode::ZBuffer: {
      ZBufferResult zres = zbuffer_parallel(subset.depths, subset.cells,
                                            intr.pixel_count(), zopts);
      eval.stats.zbuffer_iterations = zres.iterations;
      eval.stats.zbuffer_pending_per_round = zres.pending_per_round;
      subset_visible = std::move(zres.visible);
      break;
    }
    case OcclusionMode::Heuristic:
      subset_visible = heuristic_filter(subset.depths, target.depth,
                                        subset.cells, heuristic_tolerance);
      break;
  }
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (subset_visible[s]) {
      eval.visible[subset.point_indices[s]] = 1;
    } else {
      ++eval.stats.occlusion_excluded;
    }
  }

  // One point per cell: the lowest-index visible point landing there. With
  // the z-buffer all candidates tie at the minimal depth, so this implements
  // the lowest-index tie rule.
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (!subset_visible[s]) continue;
    const std::size_t cell = static_cast<std::size_t>(subset.cells[s]);
    if (eval.cell_winner[cell] >= 0) continue;
    const std::uint32_t p = subset.point_indices[s];
    eval.cell_winner[cell] = static_cast<std::int32_t>(p);
    eval.reg_hat.store(cell, eval.transformed.points()[p]);
    const auto [si, sj] = eval.transformed.source_pixels()[p];
    eval.recon.set(static_cast<int>(cell % intr.width),
                   static_cast<int>(cell / intr.width),
                   source.image.at(si, sj, 0), source.image.at(si, sj, 1),
                   source.image.at(si, sj, 2));
    eval.recon_populated[cell] = 1;
  }

  eval.reg_target =
      registration_from_cloud(inverse_project(target.depth, intr), intr);

  eval.point_term = detail::point_loss_impl(
      eval.reg_hat, eval.reg_target, &eval.counts.point_cells, &eval.point_signs);
  eval.image_term = detail::image_loss_impl(
      target.image, source.image, eval.transformed, eval.outcome, eval.visible,
      &eval.counts.image_points, &eval.image_signs);
  eval.ssim_term = detail::ssim_loss_impl(
      eval.recon, target.image, eval.recon_populated, &eval.counts.ssim_patches);
  eval.nd_term = detail::negative_depth_loss_impl(
      eval.outcome, &eval.counts.negative_points, &eval.nd_signs);
  return eval;
}

PipelineResult evaluate_pipeline(const LossProblem& problem) {
  check_frame(problem.frame_t, problem.intrinsics, "t");
  check_frame(problem.frame_t1, problem.intrinsics, "t+1");

  PipelineResult result{
      evaluate_direction(problem.frame_t, problem.frame_t1, problem.pose,
                         problem.intrinsics, problem.occlusion,
                         problem.heuristic_tolerance, problem.zbuffer_options),
      evaluate_direction(problem.frame_t1, problem.frame_t,
                         invert(problem.pose), problem.intrinsics,
                         problem.occlusion, problem.heuristic_tolerance,
                         problem.zbuffer_options),
      {}};

  LossBreakdown& b = result.breakdown;
  b.point = result.t1_to_t.point_term + result.t_to_t1.point_term;
  b.image = result.t1_to_t.image_term + result.t_to_t1.image_term;
  b.ssim = result.t1_to_t.ssim_term + result.t_to_t1.ssim_term;
  b.negative_depth = result.t1_to_t.nd_term + result.t_to_t1.nd_term;
  b.contributing.point_cells =
      result.t1_to_t.counts.point_cells + result.t_to_t1.counts.point_cells;
  b.contributing.image_points =
      result.t1_to_t.counts.image_points + result.t_to_t1.counts.image_points;
  b.contributing.ssim_patches =
      result.t1_to_t.counts.ssim_patches + result.t_to_t1.counts.ssim_patches;
  b.contributing.negative_points = result.t1_to_t.counts.negative_points +
                                   result.t_to_t1.counts.negative_points;
  const LossWeights& w = problem.weights;
  b.total = w.point * b.point + w.image * b.image + w.ssim * b.ssim +
            w.negative_depth * b.negative_depth;
  return result;
}

DiscreteState discrete_state(const PipelineResult& result) {
  DiscreteState state;
  for (const DirectionEval* eval : {&result.t1_to_t, &result.t_to_t1}) {
    state.raster.insert(state.raster.end(), eval->outcome.raster_index.begin(),
                        eval->outcome.raster_index.end());
    for (PointStatus s : eval->outcome.status)
      state.status.push_back(static_cast<std::uint8_t>(s));
    state.visible.insert(state.visible.end(), eval->visible.begin(),
                         eval->visible.end());
    state.winners.insert(state.winners.end(), eval->cell_winner.begin(),
                         eval->cell_winner.end());
    for (const auto* signs :
         {&eval->point_signs, &eval->image_signs, &eval->nd_signs})
      state.signs.insert(state.signs.end(), signs->begin(), signs->end());
  }
  return state;
}

}  // namespace reproj
