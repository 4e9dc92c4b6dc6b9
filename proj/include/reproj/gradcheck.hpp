#pragma once

#include "reproj/losses.hpp"
#include "reproj/types.hpp"

#include <cstdint>
#include <vector>

namespace reproj {

/// Per-pixel derivative of the total loss with respect to one depth map.
/// Validity mirrors the depth map; invalid pixels hold 0.
struct GradientMap {
  GradientMap(int height, int width);

  int height = 0;
  int width = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * width + i;
  }
  double at(int i, int j) const { return values[index(i, j)]; }
  double max_abs() const;
};

struct GradientPair {
  GradientMap wrt_depth_t;
  GradientMap wrt_depth_t1;
};

/// Analytic gradient of total_loss with respect to both input depth maps
/// under the fixed-mask convention: visibility, status, raster cells, cell
/// winners and SSIM patch locations are held constant (the subgradient of
/// the piecewise-smooth loss). Gradient flows through transformed point
/// coordinates into the point term, through the bilinear sample coordinates
/// into the image term, and through sign(depth) into the negative-depth
/// term. The SSIM term's splat raster holds only source pixel colors, which
/// do not depend on depth, so its depth gradient is identically zero.
GradientPair grad_total_wrt_depths(const LossProblem& problem);

struct GradCheckReport {
  double max_relative_error = 0.0;
  GradientMap errors_t;   // per-pixel relative errors; 0 where skipped
  GradientMap errors_t1;
  std::size_t pixels_checked = 0;
  std::size_t pixels_skipped_nonsmooth = 0;
};

/// Central-difference verification of the analytic gradient.
///
/// Every valid pixel of both depth maps is perturbed by +/-step. A pixel is
/// counted skipped_nonsmooth (and excluded from max_relative_error) when the
/// perturbation changes any discrete selection (status, raster cell,
/// visibility, cell winners, or a residual sign), or when the perturbed
/// point's continuous coordinates come within skip_margin pixels of a
/// bilinear cell edge (integer) or raster cell edge (half-integer), where
/// the loss has a kink central differences cannot straddle.
///
/// The relative error of pixel p is |analytic - fd| / max(|analytic|, |fd|,
/// floor) with floor = 1e-3 times the largest gradient magnitude seen, so
/// near-cancelling entries do not dominate the report.
///
/// corrupt_analytic is a negative-control hook: it is added to every
/// analytic entry before comparison, so a nonzero value must trip the check.
GradCheckReport finite_diff_check(const LossProblem& problem, double step,
                                  double skip_margin,
                                  double corrupt_analytic = 0.0);

}  // namespace reproj
