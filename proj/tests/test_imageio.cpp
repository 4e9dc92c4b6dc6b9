#include <doctest.h>

#include "reproj/imageio.hpp"
#include "test_helpers.hpp"

#include <cstring>

using namespace reproj;

namespace {

std::string as_string(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> as_bytes(const std::string& s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

TEST_CASE("PPM writer emits the exact 1x1 white pixel document") {
  Image img(1, 1);
  img.set(0, 0, 1.0, 1.0, 1.0);
  const auto bytes = write_image(img);
  CHECK(as_string(bytes) == std::string("P6\n1 1\n255\n") +
                                "\xFF\xFF\xFF");
}

TEST_CASE("PPM round trip stays within the quantization bound") {
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(testing::uniform(0, 12));
    const int h = 1 + static_cast<int>(testing::uniform(0, 12));
    Image img(h, w);
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i)
        img.set(i, j, testing::uniform(0, 1), testing::uniform(0, 1),
                testing::uniform(0, 1));
    const Image back = read_image(write_image(img));
    REQUIRE(back.width() == w);
    REQUIRE(back.height() == h);
    for (std::size_t k = 0; k < img.pixels().size(); ++k)
      CHECK(std::abs(back.pixels()[k] - img.pixels()[k]) <= 1.0 / 510.0);
  }
}

TEST_CASE("PPM parse failures carry byte offsets") {
  SUBCASE("wrong magic") {
    try {
      read_image(as_bytes("P5\n1 1\n255\n"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset() == 0);
    }
  }
  SUBCASE("bad maxval") {
    try {
      read_image(as_bytes(std::string("P6\n1 1\n65535\n") + "\0\0\0\0\0\0"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset() == 7);
    }
  }
  SUBCASE("truncated payload") {
    try {
      read_image(as_bytes(std::string("P6\n2 2\n255\n") + "\xFF\xFF"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset() == 13);  // reported at end of available bytes
    }
  }
  SUBCASE("header comments are fine") {
    const Image img = read_image(
        as_bytes(std::string("P6\n# hi\n1 1\n255\n") + std::string("\x00\x80\xFF", 3)));
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 2) == 1.0);
  }
}

TEST_CASE("PFM writer emits the exact 1x1 document") {
  DepthMap dm(1, 1);
  dm.set(0, 0, 2.0);
  const auto bytes = write_depth(dm);
  const std::string header = "Pf\n1 1\n-1.0\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(as_string(bytes).substr(0, header.size()) == header);
  float stored;
  std::memcpy(&stored, bytes.data() + header.size(), 4);
  CHECK(stored == 2.0f);
}

TEST_CASE("PFM round trip is bit exact and keeps validity") {
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(testing::uniform(0, 12));
    const int h = 1 + static_cast<int>(testing::uniform(0, 12));
    DepthMap dm(h, w);
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i)
        if (testing::uniform(0, 1) > 0.25)
          dm.set(i, j, static_cast<float>(testing::uniform(0.01, 100.0)));

    const DepthMap back = read_depth(write_depth(dm));
    REQUIRE(back.width() == w);
    REQUIRE(back.height() == h);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        CHECK(back.is_valid(i, j) == dm.is_valid(i, j));
        if (dm.is_valid(i, j)) CHECK(back.at(i, j) == dm.at(i, j));
      }
    }
  }
}

TEST_CASE("PFM rows are stored bottom to top") {
  DepthMap dm(2, 1);
  dm.set(0, 0, 1.0);  // top row
  dm.set(0, 1, 2.0);  // bottom row
  const auto bytes = write_depth(dm);
  const std::string header = "Pf\n1 2\n-1.0\n";
  float first, second;
  std::memcpy(&first, bytes.data() + header.size(), 4);
  std::memcpy(&second, bytes.data() + header.size() + 4, 4);
  CHECK(first == 2.0f);   // bottom row first
  CHECK(second == 1.0f);
}

TEST_CASE("PFM parse failures") {
  SUBCASE("stored NaN") {
    DepthMap dm(1, 1);
    dm.set(0, 0, 1.0);
    auto bytes = write_depth(dm);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
    try {
      read_depth(bytes);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset() == bytes.size() - 4);
    }
  }
  SUBCASE("negative depth value") {
    DepthMap dm(1, 1);
    dm.set(0, 0, 1.0);
    auto bytes = write_depth(dm);
    const float bad = -3.0f;
    std::memcpy(bytes.data() + bytes.size() - 4, &bad, 4);
    CHECK_THROWS_AS(read_depth(bytes), FormatError);
  }
  SUBCASE("big-endian scale rejected") {
    CHECK_THROWS_AS(read_depth(as_bytes("Pf\n1 1\n1.0\n\0\0\0\0")), FormatError);
  }
  SUBCASE("truncation") {
    CHECK_THROWS_AS(read_depth(as_bytes("Pf\n2 2\n-1.0\n\0\0\0\0")), FormatError);
  }
}
