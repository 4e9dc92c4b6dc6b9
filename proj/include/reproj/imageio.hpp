#pragma once

#include "reproj/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace reproj {

/// Serializes an image as binary PPM (P6, maxval 255). Intensities are
/// quantized with round-half-up.
std::vector<std::uint8_t> write_image(const Image& image);

/// Parses a binary PPM (P6, maxval 255). Intensities come back divided by
/// 255, so read(write(img)) matches img within 1/510 per channel.
/// Malformed input raises FormatError carrying the offending byte offset.
Image read_image(std::span<const std::uint8_t> bytes);

/// Serializes a depth map as grayscale PFM ("Pf", negative scale =
/// little-endian, rows bottom-to-top). Invalid pixels are stored as 0.0.
std::vector<std::uint8_t> write_depth(const DepthMap& depth);

/// Parses a grayscale little-endian PFM. A stored 0.0 restores an invalid
/// pixel; anything nonpositive or non-finite otherwise raises FormatError.
DepthMap read_depth(std::span<const std::uint8_t> bytes);

Image read_image_file(const std::filesystem::path& path);
void write_image_file(const std::filesystem::path& path, const Image& image);
DepthMap read_depth_file(const std::filesystem::path& path);
void write_depth_file(const std::filesystem::path& path, const DepthMap& depth);

}  // namespace reproj
