#pragma once

#include "reproj/types.hpp"

#include <cstdint>

namespace reproj {

/// Lifts every valid pixel (i, j) of a depth map to the camera-frame point
///   ((i - cx) * d / fx, (j - cy) * d / fy, d),
/// tagged with its source pixel. Output is row-major by source pixel.
PointCloud inverse_project(const DepthMap& depth, const Intrinsics& intr);

/// Applies p -> rotation * p + translation to every point.
/// Source-pixel tags and point order are preserved.
PointCloud transform(const PointCloud& cloud, const RigidTransform& pose);

/// Inverse motion: invert(q) composed with q is the identity.
RigidTransform invert(const RigidTransform& pose);

/// Composition a * b: apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Projects each point to continuous pixel coordinates
///   u = fx * x / z + cx,  v = fy * y / z + cy
/// and classifies it. Rounded coordinates inside the frame with z > 0 give
/// InFramePositive, with z < 0 NegativeInFrame; everything else (including
/// z exactly 0, whose projection is undefined) is OutOfFrame.
ProjectionOutcome project(const PointCloud& cloud, const Intrinsics& intr);

/// Absolute raster index j * width + i of an integer pixel.
/// Requires 0 <= i < width and j >= 0.
std::int64_t raster_index(std::int64_t i, std::int64_t j, std::int64_t width);

/// Rounding used to map continuous coordinates to raster pixels:
/// half away from zero.
inline double round_pixel(double x) { return std::round(x); }

}  // namespace reproj
