#include "reproj/imageio.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace reproj {

namespace {

// Incremental header tokenizer that remembers its byte offset for errors.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  // Reads the next whitespace-delimited token, skipping '#' comments.
  std::string token() {
    skip_separators();
    if (pos_ >= bytes_.size())
      throw FormatError("unexpected end of header", pos_);
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]))
      tok.push_back(static_cast<char>(bytes_[pos_++]));
    return tok;
  }

  // Consumes exactly one whitespace byte; the payload starts right after.
  void finish_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError("expected whitespace before payload", pos_);
    ++pos_;
  }

  long parse_positive_int(const std::string& what) {
    const std::size_t at = pos_;
    const std::string tok = token();
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(tok, &used);
    } catch (const std::exception&) {
      throw FormatError("malformed " + what, at);
    }
    if (used != tok.size() || value <= 0)
      throw FormatError("malformed " + what, at);
    return value;
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void append(std::vector<std::uint8_t>& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
}

float to_little_endian(float v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  auto bits = std::bit_cast<std::uint32_t>(v);
  bits = ((bits & 0xff) << 24) | ((bits & 0xff00) << 8) |
         ((bits >> 8) & 0xff00) | (bits >> 24);
  return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("failed writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> write_image(const Image& image) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + image.pixels().size());
  append(out, "P6\n" + std::to_string(image.width()) + " " +
                  std::to_string(image.height()) + "\n255\n");
  for (double v : image.pixels())
    out.push_back(static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)));
  return out;
}

Image read_image(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::size_t magic_at = header.offset();
  if (header.token() != "P6") throw FormatError("not a P6 PPM", magic_at);
  const long width = header.parse_positive_int("width");
  const long height = header.parse_positive_int("height");
  const std::size_t maxval_at = header.offset();
  if (header.parse_positive_int("maxval") != 255)
    throw FormatError("unsupported maxval (expected 255)", maxval_at);
  header.finish_header();

  const std::size_t payload = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() - header.offset() < payload)
    throw FormatError("truncated pixel payload", bytes.size());
  std::vector<double> pixels(payload);
  for (std::size_t k = 0; k < payload; ++k)
    pixels[k] = bytes[header.offset() + k] / 255.0;
  return Image(static_cast<int>(height), static_cast<int>(width),
               std::move(pixels));
}

std::vector<std::uint8_t> write_depth(const DepthMap& depth) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + depth.values().size() * 4);
  append(out, "Pf\n" + std::to_string(depth.width()) + " " +
                  std::to_string(depth.height()) + "\n-1.0\n");
  // PFM stores rows bottom-to-top; in-memory order is top-to-bottom.
  for (int j = depth.height() - 1; j >= 0; --j) {
    for (int i = 0; i < depth.width(); ++i) {
      const float v = to_little_endian(
          depth.is_valid(i, j) ? static_cast<float>(depth.at(i, j)) : 0.0f);
      std::uint8_t raw[4];
      std::memcpy(raw, &v, 4);
      out.insert(out.end(), raw, raw + 4);
    }
  }
  return out;
}

DepthMap read_depth(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::size_t magic_at = header.offset();
  const std::string magic = header.token();
  if (magic == "PF") throw FormatError("color PFM is not supported", magic_at);
  if (magic != "Pf") throw FormatError("not a grayscale PFM", magic_at);
  const long width = header.parse_positive_int("width");
  const long height = header.parse_positive_int("height");
  const std::size_t scale_at = header.offset();
  const std::string scale_tok = header.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw FormatError("malformed scale", scale_at);
  }
  if (!(scale < 0.0))
    throw FormatError("big-endian PFM (nonnegative scale) is not supported",
                      scale_at);
  header.finish_header();

  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - header.offset() < count * 4)
    throw FormatError("truncated depth payload", bytes.size());

  DepthMap depth(static_cast<int>(height), static_cast<int>(width));
  for (long j = height - 1; j >= 0; --j) {
    for (long i = 0; i < width; ++i) {
      const std::size_t at =
          header.offset() + (static_cast<std::size_t>(height - 1 - j) * width +
                             static_cast<std::size_t>(i)) *
                                4;
      float v;
      std::memcpy(&v, bytes.data() + at, 4);
      v = to_little_endian(v);
      if (v == 0.0f) continue;  // invalid-pixel sentinel
      if (!std::isfinite(v) || v < 0.0f)
        throw FormatError("depth value is not positive finite or 0.0", at);
      depth.set(static_cast<int>(i), static_cast<int>(j),
                static_cast<double>(v));
    }
  }
  return depth;
}

Image read_image_file(const std::filesystem::path& path) {
  return read_image(read_file(path));
}

void write_image_file(const std::filesystem::path& path, const Image& image) {
  write_file(path, write_image(image));
}

DepthMap read_depth_file(const std::filesystem::path& path) {
  return read_depth(read_file(path));
}

void write_depth_file(const std::filesystem::path& path, const DepthMap& depth) {
  write_file(path, write_depth(depth));
}

}  // namespace reproj
