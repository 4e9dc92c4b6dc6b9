#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reproj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Caller handed in data that violates a documented precondition.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed byte stream. Carries the offset where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " at byte " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// A broken internal invariant. Indicates a bug, never bad input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// Axis-aligned pinhole camera with zero skew.
///
/// Pixel coordinate u runs along the width and pairs with (fx, cx); v runs
/// along the height and pairs with (fy, cy). Depth is camera-frame z.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Intrinsics() = default;
  Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Proper rigid motion p -> rotation * p + translation.
/// Construction rejects rotations that are not orthonormal with det +1
/// (tolerance 1e-9 per entry).
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

/// Per-pixel depth in meters with an explicit validity mask.
/// Valid entries are finite and strictly positive; invalid entries hold 0.
class DepthMap {
 public:
  DepthMap(int height, int width);
  DepthMap(int height, int width, std::vector<double> values,
           std::vector<std::uint8_t> validity);

  int height() const { return height_; }
  int width() const { return width_; }

  bool is_valid(int i, int j) const { return validity_[index(i, j)] != 0; }
  double at(int i, int j) const { return values_[index(i, j)]; }

  /// Marks (i, j) valid with depth d. Rejects non-finite or nonpositive d.
  void set(int i, int j, double d);
  void invalidate(int i, int j);

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& validity() const { return validity_; }
  std::size_t valid_count() const;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * width_ + i;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> validity_;
};

/// RGB image with intensities in [0, 1], channel-interleaved row-major.
class Image {
 public:
  Image(int height, int width);
  Image(int height, int width, std::vector<double> pixels);

  int height() const { return height_; }
  int width() const { return width_; }

  double at(int i, int j, int c) const { return pixels_[index(i, j, c)]; }
  void set(int i, int j, double r, double g, double b);

  const std::vector<double>& pixels() const { return pixels_; }

  std::size_t index(int i, int j, int c) const {
    return (static_cast<std::size_t>(j) * width_ + i) * 3 + c;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

struct PixelCoord {
  int i = 0;  // along width
  int j = 0;  // along height

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// 3D points in a camera frame, each tagged with the pixel it came from.
/// Source pixels are pairwise distinct and lie inside the originating frame,
/// whose dimensions the cloud remembers.
class PointCloud {
 public:
  PointCloud(std::vector<Vec3> points, std::vector<PixelCoord> source_pixels,
             int origin_width, int origin_height);

  static PointCloud empty(int origin_width, int origin_height) {
    return PointCloud({}, {}, origin_width, origin_height);
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<PixelCoord>& source_pixels() const { return source_pixels_; }
  int origin_width() const { return origin_width_; }
  int origin_height() const { return origin_height_; }

 private:
  std::vector<Vec3> points_;
  std::vector<PixelCoord> source_pixels_;
  int origin_width_ = 0;
  int origin_height_ = 0;
};

enum class PointStatus : std::uint8_t {
  InFramePositive,  // positive depth, rounded pixel inside the frame
  OutOfFrame,       // rounded pixel outside the frame (or depth exactly 0)
  NegativeInFrame,  // negative depth, rounded pixel inside the frame
};

/// Result of projecting a point cloud onto an image plane.
///
/// u, v are continuous pixel coordinates and depth is camera-frame z, one
/// entry per input point. raster_index is round(v) * width + round(u)
/// (rounding half away from zero) and is -1 for OutOfFrame points.
struct ProjectionOutcome {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> depth;
  std::vector<std::int64_t> raster_index;
  std::vector<PointStatus> status;

  std::size_t size() const { return status.size(); }
  std::size_t count(PointStatus s) const;
};

/// Raster grid assigning one 3D point to each populated pixel.
/// Unpopulated cells hold the all-zero sentinel and take part in no reduction.
class Registration {
 public:
  Registration(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  bool populated(int i, int j) const { return populated_[index(i, j)] != 0; }
  bool populated_at(std::size_t cell) const { return populated_[cell] != 0; }
  const Vec3& coords(int i, int j) const { return coords_[index(i, j)]; }
  const Vec3& coords_at(std::size_t cell) const { return coords_[cell]; }

  void store(std::size_t cell, const Vec3& p) {
    coords_[cell] = p;
    populated_[cell] = 1;
  }

  std::size_t populated_count() const;
  std::size_t cell_count() const { return coords_.size(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * width_ + i;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Vec3> coords_;
  std::vector<std::uint8_t> populated_;
};

}  // namespace reproj
