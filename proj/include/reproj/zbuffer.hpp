#pragma once

#include "reproj/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace reproj {

/// Outcome of occlusion resolution over a set of projected points.
struct ZBufferResult {
  /// Winning (minimum) depth per raster cell; +inf where no point landed.
  std::vector<double> zbuffer;
  /// Per input point: 1 iff its depth equals the final buffer value at its
  /// cell. Points tied at the minimum are all visible.
  std::vector<std::uint8_t> visible;
  /// Number of scatter/gather rounds executed (>= 1).
  int iterations = 0;
  /// Size of the contracted set after each round; ends with 0.
  std::vector<std::size_t> pending_per_round;

  std::vector<std::size_t> visible_indices() const;
  std::size_t visible_count() const;
};

/// Options for zbuffer_parallel.
///
/// The scatter phase tolerates write races by contract: any competing writer
/// may win a cell per round. threads == 1 resolves races deterministically
/// (last writer in point-index order wins); threads > 1 scatters from worker
/// threads with per-cell stores that are atomic at value granularity, so the
/// round winner is scheduling-dependent. scatter_order is a test hook: a
/// permutation of [0, n) that replaces index order as the write order.
struct ZBufferOptions {
  int threads = 1;
  const std::vector<std::size_t>* scatter_order = nullptr;
};

/// Race-then-repair parallel z-buffering.
///
/// Scatters depths into the buffer keyed by raster index (competing writers
/// race), gathers the stored value back per point, contracts to the points
/// strictly nearer than the stored value, and repeats until the contracted
/// set is empty. The contracted set shrinks strictly every round, so the
/// rounds are bounded by the largest number of points on one cell. Visibility
/// is decided afterwards by exact equality between each point's depth and the
/// final buffer value at its cell; values flow through scatter/gather
/// unmodified, so no tolerance is involved.
///
/// Inputs must already be filtered to in-frame positive-depth points: every
/// depth finite and > 0, every raster index in [0, cell_count).
ZBufferResult zbuffer_parallel(std::span<const double> depths,
                               std::span<const std::int64_t> raster_indices,
                               std::size_t cell_count,
                               const ZBufferOptions& options = {});

/// Single-pass reference: per-cell minimum, visible = all points achieving
/// their cell's minimum. Reported iteration count is 1.
ZBufferResult zbuffer_serial_oracle(std::span<const double> depths,
                                    std::span<const std::int64_t> raster_indices,
                                    std::size_t cell_count);

/// Minimum-depth-consistency filter: point p passes iff
///   depths[p] <= target_depth at p's raster cell + tolerance.
/// Cells where the target depth is invalid pass all points. A heuristic
/// stand-in for the z-buffer, kept as a comparison baseline.
std::vector<std::uint8_t> heuristic_filter(
    std::span<const double> depths, const DepthMap& target_depth,
    std::span<const std::int64_t> raster_indices, double tolerance);

/// The InFramePositive points of an outcome, in point order, ready to feed
/// the z-buffer.
struct InFrameSubset {
  std::vector<double> depths;
  std::vector<std::int64_t> cells;
  std::vector<std::uint32_t> point_indices;  // back into the full cloud

  std::size_t size() const { return depths.size(); }
};

InFrameSubset in_frame_positive_subset(const ProjectionOutcome& outcome);

/// Stores each visible point's 3D coordinates at its raster cell. zres must
/// come from outcome's InFramePositive subset (as produced by
/// in_frame_positive_subset). Depth ties are broken by lowest point index.
Registration register_visible(const PointCloud& cloud,
                              const ProjectionOutcome& outcome,
                              const ZBufferResult& zres,
                              const Intrinsics& intr);

/// A cloud reshaped onto its own originating raster: each point lands at its
/// source pixel.
Registration registration_from_cloud(const PointCloud& cloud,
                                     const Intrinsics& intr);

}  // namespace reproj
