#include "reproj/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace reproj {

PointCloud inverse_project(const DepthMap& depth, const Intrinsics& intr) {
  if (depth.width() != intr.width || depth.height() != intr.height)
    throw InvalidInput("inverse_project: depth dimensions do not match intrinsics");

  std::vector<Vec3> points;
  std::vector<PixelCoord> pixels;
  points.reserve(depth.valid_count());
  pixels.reserve(points.capacity());
  for (int j = 0; j < depth.height(); ++j) {
    for (int i = 0; i < depth.width(); ++i) {
      if (!depth.is_valid(i, j)) continue;
      const double d = depth.at(i, j);
      points.emplace_back((i - intr.cx) * d / intr.fx,
                          (j - intr.cy) * d / intr.fy, d);
      pixels.push_back({i, j});
    }
  }
  return PointCloud(std::move(points), std::move(pixels), intr.width,
                    intr.height);
}

PointCloud transform(const PointCloud& cloud, const RigidTransform& pose) {
  std::vector<Vec3> points;
  points.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) points.push_back(pose.apply(p));
  return PointCloud(std::move(points), cloud.source_pixels(),
                    cloud.origin_width(), cloud.origin_height());
}

RigidTransform invert(const RigidTransform& pose) {
  const Mat3 rt = pose.rotation.transpose();
  return RigidTransform(rt, -(rt * pose.translation));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation * b.rotation,
                        a.rotation * b.translation + a.translation);
}

ProjectionOutcome project(const PointCloud& cloud, const Intrinsics& intr) {
  const std::size_t n = cloud.size();
  ProjectionOutcome out;
  out.u.resize(n);
  out.v.resize(n);
  out.depth.resize(n);
  out.raster_index.resize(n);
  out.status.resize(n);

  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& pt = cloud.points()[p];
    const double z = pt.z();
    out.depth[p] = z;
    if (z == 0.0) {
      // Projection undefined; excluded by the principled mask.
      out.u[p] = std::numeric_limits<double>::quiet_NaN();
      out.v[p] = std::numeric_limits<double>::quiet_NaN();
      out.raster_index[p] = -1;
      out.status[p] = PointStatus::OutOfFrame;
      continue;
    }
    const double u = intr.fx * pt.x() / z + intr.cx;
    const double v = intr.fy * pt.y() / z + intr.cy;
    out.u[p] = u;
    out.v[p] = v;
    const double ru = round_pixel(u);
    const double rv = round_pixel(v);
    const bool in_frame =
        ru >= 0.0 && ru < intr.width && rv >= 0.0 && rv < intr.height;
    if (!in_frame) {
      out.raster_index[p] = -1;
      out.status[p] = PointStatus::OutOfFrame;
      continue;
    }
    out.raster_index[p] = raster_index(static_cast<std::int64_t>(ru),
                                       static_cast<std::int64_t>(rv),
                                       intr.width);
    out.status[p] = z > 0.0 ? PointStatus::InFramePositive
                            : PointStatus::NegativeInFrame;
  }
  return out;
}

std::int64_t raster_index(std::int64_t i, std::int64_t j, std::int64_t width) {
  if (i < 0 || i >= width)
    throw InvalidInput("raster_index: column index outside [0, width)");
  if (j < 0) throw InvalidInput("raster_index: row index must be nonnegative");
  return j * width + i;
}

}  // namespace reproj
