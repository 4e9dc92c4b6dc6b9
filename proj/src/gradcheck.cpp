#include "reproj/gradcheck.hpp"

#include "reproj/geometry.hpp"
#include "reproj/numerics.hpp"
#include "reproj/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace reproj {

namespace {

// Direction of the ray through pixel (i, j) at unit depth.
Vec3 pixel_ray(int i, int j, const Intrinsics& intr) {
  return {(i - intr.cx) / intr.fx, (j - intr.cy) / intr.fy, 1.0};
}

// Adds one direction's contributions. g_source is the gradient of the depth
// map whose points were transformed; g_target belongs to the frame being
// reconstructed (it enters only through the point term's registration).
void accumulate_direction(const DirectionEval& eval, const Intrinsics& intr,
                          const LossWeights& weights,
                          const Image& target_image, const Image& source_image,
                          const RigidTransform& source_to_target,
                          GradientMap& g_source, GradientMap& g_target) {
  const Mat3& rot = source_to_target.rotation;
  const auto& points = eval.transformed.points();
  const auto& pixels = eval.transformed.source_pixels();

  if (weights.negative_depth != 0.0) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (eval.outcome.status[p] != PointStatus::NegativeInFrame) continue;
      const auto [i, j] = pixels[p];
      const Vec3 a = rot * pixel_ray(i, j, intr);
      g_source.values[g_source.index(i, j)] +=
          weights.negative_depth * sign(eval.outcome.depth[p]) * a.z();
    }
  }

  if (weights.image != 0.0 && eval.counts.image_points > 0) {
    const double scale = weights.image / eval.counts.image_points;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (!eval.visible[p]) continue;
      const auto [i, j] = pixels[p];
      const Vec3 a = rot * pixel_ray(i, j, intr);
      const double z = points[p].z();
      const double du_dd = intr.fx * (a.x() * z - points[p].x() * a.z()) / (z * z);
      const double dv_dd = intr.fy * (a.y() * z - points[p].y() * a.z()) / (z * z);
      const BilinearSample s =
          sample_bilinear(target_image, eval.outcome.u[p], eval.outcome.v[p]);
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double r = s.value[c] - source_image.at(i, j, c);
        acc += sign(r) * (s.du[c] * du_dd + s.dv[c] * dv_dd);
      }
      g_source.values[g_source.index(i, j)] += scale * acc;
    }
  }

  if (weights.point != 0.0 && eval.counts.point_cells > 0) {
    const double scale = weights.point / eval.counts.point_cells;
    for (int cj = 0; cj < intr.height; ++cj) {
      for (int ci = 0; ci < intr.width; ++ci) {
        const std::size_t cell = eval.reg_hat.index(ci, cj);
        if (!eval.reg_hat.populated_at(cell) ||
            !eval.reg_target.populated_at(cell))
          continue;
        const std::int32_t p = eval.cell_winner[cell];
        const Vec3 delta =
            eval.reg_hat.coords_at(cell) - eval.reg_target.coords_at(cell);
        const auto [i, j] = pixels[static_cast<std::size_t>(p)];
        const Vec3 a = rot * pixel_ray(i, j, intr);
        const Vec3 q_target = pixel_ray(ci, cj, intr);
        double src = 0.0, tgt = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double s = sign(delta[k]);
          src += s * a[k];
          tgt += s * q_target[k];
        }
        g_source.values[g_source.index(i, j)] += scale * src;
        g_target.values[g_target.index(ci, cj)] -= scale * tgt;
      }
    }
  }

  // The SSIM raster holds splatted source colors; under fixed raster
  // locations it is constant in depth, so there is nothing to add.
}

// True when x is within margin of the lattice {offset + k : k integer}.
bool near_lattice(double x, double offset, double margin) {
  const double d = std::abs(x - offset - std::round(x - offset));
  return d < margin;
}

struct Probe {
  double analytic = 0.0;
  double fd = 0.0;
  bool skipped = false;
};

}  // namespace

GradientMap::GradientMap(int height, int width)
    : height(height),
      width(width),
      values(static_cast<std::size_t>(height) * width, 0.0),
      valid(static_cast<std::size_t>(height) * width, 0) {}

double GradientMap::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

GradientPair grad_total_wrt_depths(const LossProblem& problem) {
  const PipelineResult res = evaluate_pipeline(problem);
  const Intrinsics& intr = problem.intrinsics;

  GradientPair grads{GradientMap(intr.height, intr.width),
                     GradientMap(intr.height, intr.width)};
  grads.wrt_depth_t.valid = problem.frame_t.depth.validity();
  grads.wrt_depth_t1.valid = problem.frame_t1.depth.validity();

  // t+1 -> t: source depth map is t+1, target frame is t.
  accumulate_direction(res.t1_to_t, intr, problem.weights,
                       problem.frame_t.image, problem.frame_t1.image,
                       problem.pose, grads.wrt_depth_t1, grads.wrt_depth_t);
  // t -> t+1 under the inverse pose.
  accumulate_direction(res.t_to_t1, intr, problem.weights,
                       problem.frame_t1.image, problem.frame_t.image,
                       invert(problem.pose), grads.wrt_depth_t,
                       grads.wrt_depth_t1);
  return grads;
}

GradCheckReport finite_diff_check(const LossProblem& problem, double step,
                                  double skip_margin,
                                  double corrupt_analytic) {
  if (!(step > 0.0)) throw InvalidInput("finite_diff_check: step must be positive");

  const Intrinsics& intr = problem.intrinsics;
  const PipelineResult center = evaluate_pipeline(problem);
  const DiscreteState center_state = discrete_state(center);
  const GradientPair analytic = grad_total_wrt_depths(problem);

  // Where each source pixel's point sits in its direction's cloud, so a
  // probe can watch its own continuous coordinates.
  const auto point_of_pixel = [&](const DirectionEval& eval) {
    std::vector<std::int64_t> map(intr.pixel_count(), -1);
    const auto& pix = eval.transformed.source_pixels();
    for (std::size_t p = 0; p < pix.size(); ++p)
      map[static_cast<std::size_t>(pix[p].j) * intr.width + pix[p].i] =
          static_cast<std::int64_t>(p);
    return map;
  };
  const std::vector<std::int64_t> point_in_t_to_t1 = point_of_pixel(center.t_to_t1);
  const std::vector<std::int64_t> point_in_t1_to_t = point_of_pixel(center.t1_to_t);

  GradCheckReport report{0.0,
                         GradientMap(intr.height, intr.width),
                         GradientMap(intr.height, intr.width),
                         0,
                         0};

  std::vector<Probe> probes_t(intr.pixel_count());
  std::vector<Probe> probes_t1(intr.pixel_count());

  const auto coordinates_near_kink = [&](const PipelineResult& result,
                                         bool map_is_t, std::size_t cell) {
    // The probed pixel's own projection, in the direction where its frame is
    // the source. Bilinear kinks live on integer coordinates, raster cell
    // edges on half-integers; both must stay clear of the probe.
    const DirectionEval& eval = map_is_t ? result.t_to_t1 : result.t1_to_t;
    const std::int64_t p =
        (map_is_t ? point_in_t_to_t1 : point_in_t1_to_t)[cell];
    if (p < 0) return false;
    if (eval.outcome.status[static_cast<std::size_t>(p)] ==
        PointStatus::OutOfFrame)
      return false;
    const double u = eval.outcome.u[static_cast<std::size_t>(p)];
    const double v = eval.outcome.v[static_cast<std::size_t>(p)];
    return near_lattice(u, 0.0, skip_margin) || near_lattice(u, 0.5, skip_margin) ||
           near_lattice(v, 0.0, skip_margin) || near_lattice(v, 0.5, skip_margin);
  };

  const auto run_map = [&](bool map_is_t) {
    const DepthMap& dm =
        map_is_t ? problem.frame_t.depth : problem.frame_t1.depth;
    const GradientMap& grad =
        map_is_t ? analytic.wrt_depth_t : analytic.wrt_depth_t1;
    std::vector<Probe>& probes = map_is_t ? probes_t : probes_t1;

    for (int j = 0; j < intr.height; ++j) {
      for (int i = 0; i < intr.width; ++i) {
        if (!dm.is_valid(i, j)) continue;
        const std::size_t cell = dm.index(i, j);
        Probe& probe = probes[cell];
        probe.analytic = grad.values[cell] + corrupt_analytic;

        const double d0 = dm.at(i, j);
        if (d0 - step <= 0.0) {  // cannot straddle without leaving the domain
          probe.skipped = true;
          continue;
        }

        LossProblem perturbed = problem;
        DepthMap& target_map = map_is_t ? perturbed.frame_t.depth
                                        : perturbed.frame_t1.depth;
        target_map.set(i, j, d0 + step);
        const PipelineResult plus = evaluate_pipeline(perturbed);
        target_map.set(i, j, d0 - step);
        const PipelineResult minus = evaluate_pipeline(perturbed);

        if (discrete_state(plus) != center_state ||
            discrete_state(minus) != center_state ||
            coordinates_near_kink(center, map_is_t, cell) ||
            coordinates_near_kink(plus, map_is_t, cell) ||
            coordinates_near_kink(minus, map_is_t, cell)) {
          probe.skipped = true;
          continue;
        }
        probe.fd = (plus.breakdown.total - minus.breakdown.total) / (2.0 * step);
      }
    }
  };
  run_map(true);
  run_map(false);

  // Scale-aware floor keeps near-cancelling entries from dominating.
  double scale = 0.0;
  const auto collect_scale = [&](const std::vector<Probe>& probes,
                                 const DepthMap& dm) {
    for (std::size_t c = 0; c < probes.size(); ++c) {
      if (!dm.validity()[c] || probes[c].skipped) continue;
      scale = std::max({scale, std::abs(probes[c].analytic),
                        std::abs(probes[c].fd)});
    }
  };
  collect_scale(probes_t, problem.frame_t.depth);
  collect_scale(probes_t1, problem.frame_t1.depth);
  const double floor = 1e-3 * scale;

  const auto finalize = [&](const std::vector<Probe>& probes,
                            const DepthMap& dm, GradientMap& errors) {
    errors.valid = dm.validity();
    for (std::size_t c = 0; c < probes.size(); ++c) {
      if (!dm.validity()[c]) continue;
      if (probes[c].skipped) {
        ++report.pixels_skipped_nonsmooth;
        continue;
      }
      const double denom =
          std::max({std::abs(probes[c].analytic), std::abs(probes[c].fd), floor});
      const double err =
          denom == 0.0 ? 0.0 : std::abs(probes[c].analytic - probes[c].fd) / denom;
      errors.values[c] = err;
      report.max_relative_error = std::max(report.max_relative_error, err);
      ++report.pixels_checked;
    }
  };
  finalize(probes_t, problem.frame_t.depth, report.errors_t);
  finalize(probes_t1, problem.frame_t1.depth, report.errors_t1);
  return report;
}

}  // namespace reproj
