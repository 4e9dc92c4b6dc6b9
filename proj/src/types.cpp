#include "reproj/types.hpp"

#include <cmath>

namespace reproj {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy, int width,
                       int height)
    : fx(fx), fy(fy), cx(cx), cy(cy), width(width), height(height) {
  if (!(finite(fx) && finite(fy) && finite(cx) && finite(cy)))
    throw InvalidInput("Intrinsics: parameters must be finite");
  if (fx <= 0.0 || fy <= 0.0)
    throw InvalidInput("Intrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw InvalidInput("Intrinsics: frame dimensions must be at least 1x1");
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation(rotation), translation(translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw InvalidInput("RigidTransform: entries must be finite");
  constexpr double kTol = 1e-9;
  const Mat3 gram = rotation.transpose() * rotation;
  if (((gram - Mat3::Identity()).cwiseAbs().maxCoeff()) > kTol)
    throw InvalidInput("RigidTransform: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > kTol)
    throw InvalidInput("RigidTransform: rotation determinant is not +1");
}

DepthMap::DepthMap(int height, int width)
    : height_(height),
      width_(width),
      values_(static_cast<std::size_t>(height) * width, 0.0),
      validity_(static_cast<std::size_t>(height) * width, 0) {
  if (height < 1 || width < 1)
    throw InvalidInput("DepthMap: dimensions must be at least 1x1");
}

DepthMap::DepthMap(int height, int width, std::vector<double> values,
                   std::vector<std::uint8_t> validity)
    : height_(height),
      width_(width),
      values_(std::move(values)),
      validity_(std::move(validity)) {
  if (height < 1 || width < 1)
    throw InvalidInput("DepthMap: dimensions must be at least 1x1");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (values_.size() != n || validity_.size() != n)
    throw InvalidInput("DepthMap: grid size does not match dimensions");
  for (std::size_t k = 0; k < n; ++k) {
    if (validity_[k]) {
      if (!finite(values_[k]) || values_[k] <= 0.0)
        throw InvalidInput("DepthMap: valid entries must be finite and positive");
    } else {
      values_[k] = 0.0;
    }
  }
}

void DepthMap::set(int i, int j, double d) {
  if (!finite(d) || d <= 0.0)
    throw InvalidInput("DepthMap::set: depth must be finite and positive");
  values_[index(i, j)] = d;
  validity_[index(i, j)] = 1;
}

void DepthMap::invalidate(int i, int j) {
  values_[index(i, j)] = 0.0;
  validity_[index(i, j)] = 0;
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : validity_) n += v != 0;
  return n;
}

Image::Image(int height, int width)
    : height_(height),
      width_(width),
      pixels_(static_cast<std::size_t>(height) * width * 3, 0.0) {
  if (height < 1 || width < 1)
    throw InvalidInput("Image: dimensions must be at least 1x1");
}

Image::Image(int height, int width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 1 || width < 1)
    throw InvalidInput("Image: dimensions must be at least 1x1");
  if (pixels_.size() != static_cast<std::size_t>(height) * width * 3)
    throw InvalidInput("Image: pixel buffer size does not match dimensions");
  for (double p : pixels_) {
    if (!finite(p) || p < 0.0 || p > 1.0)
      throw InvalidInput("Image: intensities must be finite and within [0, 1]");
  }
}

void Image::set(int i, int j, double r, double g, double b) {
  for (double c : {r, g, b}) {
    if (!finite(c) || c < 0.0 || c > 1.0)
      throw InvalidInput("Image::set: intensities must be finite and within [0, 1]");
  }
  pixels_[index(i, j, 0)] = r;
  pixels_[index(i, j, 1)] = g;
  pixels_[index(i, j, 2)] = b;
}

PointCloud::PointCloud(std::vector<Vec3> points,
                       std::vector<PixelCoord> source_pixels, int origin_width,
                       int origin_height)
    : points_(std::move(points)),
      source_pixels_(std::move(source_pixels)),
      origin_width_(origin_width),
      origin_height_(origin_height) {
  if (origin_width < 1 || origin_height < 1)
    throw InvalidInput("PointCloud: origin frame dimensions must be positive");
  if (points_.size() != source_pixels_.size())
    throw InvalidInput("PointCloud: points and source pixels differ in length");
  const std::size_t cells =
      static_cast<std::size_t>(origin_width) * origin_height;
  if (points_.size() > cells)
    throw InvalidInput("PointCloud: more points than originating pixels");
  std::vector<std::uint8_t> seen(cells, 0);
  for (std::size_t p = 0; p < points_.size(); ++p) {
    if (!points_[p].allFinite())
      throw InvalidInput("PointCloud: coordinates must be finite");
    const auto [i, j] = source_pixels_[p];
    if (i < 0 || i >= origin_width || j < 0 || j >= origin_height)
      throw InvalidInput("PointCloud: source pixel outside originating frame");
    const std::size_t cell = static_cast<std::size_t>(j) * origin_width + i;
    if (seen[cell])
      throw InvalidInput("PointCloud: duplicate source pixel");
    seen[cell] = 1;
  }
}

std::size_t ProjectionOutcome::count(PointStatus s) const {
  std::size_t n = 0;
  for (auto st : status) n += st == s;
  return n;
}

Registration::Registration(int height, int width)
    : height_(height),
      width_(width),
      coords_(static_cast<std::size_t>(height) * width, Vec3::Zero()),
      populated_(static_cast<std::size_t>(height) * width, 0) {
  if (height < 1 || width < 1)
    throw InvalidInput("Registration: dimensions must be at least 1x1");
}

std::size_t Registration::populated_count() const {
  std::size_t n = 0;
  for (auto v : populated_) n += v != 0;
  return n;
}

}  // namespace reproj
