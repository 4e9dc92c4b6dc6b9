#include <doctest.h>

#include "reproj/geometry.hpp"
#include "reproj/scene.hpp"
#include "reproj/zbuffer.hpp"
#include "test_helpers.hpp"

#include <algorithm>
#include <numeric>

using namespace reproj;

namespace {

// Independent brute-force reference used to cross-check both library
// implementations: per-cell minimum by exhaustive scan.
std::vector<std::uint8_t> brute_force_visible(
    const std::vector<double>& depths, const std::vector<std::int64_t>& cells) {
  std::vector<std::uint8_t> visible(depths.size(), 1);
  for (std::size_t p = 0; p < depths.size(); ++p)
    for (std::size_t q = 0; q < depths.size(); ++q)
      if (cells[p] == cells[q] && depths[q] < depths[p]) visible[p] = 0;
  return visible;
}

}  // namespace

TEST_CASE("two points on one cell: the nearer wins") {
  const std::vector<double> depths{5.0, 3.0};
  const std::vector<std::int64_t> cells{7, 7};
  for (const auto& res :
       {zbuffer_parallel(depths, cells, 16), zbuffer_serial_oracle(depths, cells, 16)}) {
    CHECK(res.visible == std::vector<std::uint8_t>{0, 1});
    CHECK(res.zbuffer[7] == 3.0);
    CHECK(std::isinf(res.zbuffer[6]));
  }
}

TEST_CASE("distinct cells settle in one round") {
  const std::vector<double> depths{5.0, 3.0, 1.0};
  const std::vector<std::int64_t> cells{0, 5, 9};
  const ZBufferResult res = zbuffer_parallel(depths, cells, 10);
  CHECK(res.iterations == 1);
  CHECK(res.visible == std::vector<std::uint8_t>{1, 1, 1});
}

TEST_CASE("ties at the minimum are all visible") {
  const std::vector<double> depths{2.0, 2.0};
  const std::vector<std::int64_t> cells{7, 7};
  CHECK(zbuffer_serial_oracle(depths, cells, 16).visible ==
        std::vector<std::uint8_t>{1, 1});
  CHECK(zbuffer_parallel(depths, cells, 16).visible ==
        std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(zbuffer_parallel(std::vector<double>{1.0},
                                   std::vector<std::int64_t>{4}, 4),
                  InvalidInput);
  CHECK_THROWS_AS(zbuffer_parallel(std::vector<double>{-1.0},
                                   std::vector<std::int64_t>{0}, 4),
                  InvalidInput);
  CHECK_THROWS_AS(
      zbuffer_parallel(std::vector<double>{std::numeric_limits<double>::infinity()},
                       std::vector<std::int64_t>{0}, 4),
      InvalidInput);
  CHECK_THROWS_AS(zbuffer_parallel(std::vector<double>{1.0, 2.0},
                                   std::vector<std::int64_t>{0}, 4),
                  InvalidInput);
}

TEST_CASE("empty input yields an empty buffer after one round") {
  const ZBufferResult res = zbuffer_parallel({}, {}, 8);
  CHECK(res.iterations == 1);
  CHECK(res.visible_count() == 0);
  for (double z : res.zbuffer) CHECK(std::isinf(z));
}

TEST_CASE("adversarial stacks: every write order, m <= 5") {
  // All m points on one cell of a 3x3 grid, exhaustive over write orders.
  for (int m = 2; m <= 5; ++m) {
    std::vector<double> depths;
    for (int k = 0; k < m; ++k) depths.push_back(1.0 + k);
    const std::vector<std::int64_t> cells(m, 4);
    const ZBufferResult oracle = zbuffer_serial_oracle(depths, cells, 9);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    int worst = 0;
    do {
      ZBufferOptions options;
      options.scatter_order = &order;
      const ZBufferResult res = zbuffer_parallel(depths, cells, 9, options);
      CHECK(res.visible == oracle.visible);
      CHECK(res.zbuffer == oracle.zbuffer);
      CHECK(res.iterations <= m);
      worst = std::max(worst, res.iterations);
    } while (std::next_permutation(order.begin(), order.end()));
    // Ascending depth in write order is the worst case: m rounds.
    CHECK(worst == m);
  }
}

TEST_CASE("random instances agree with the serial oracle and brute force") {
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1000;
    const std::size_t cell_count = 64 * 64;
    std::vector<double> depths;
    std::vector<std::int64_t> cells;
    for (std::size_t k = 0; k < n; ++k) {
      depths.push_back(testing::uniform(0.1, 50.0));
      cells.push_back(static_cast<std::int64_t>(
          testing::uniform(0, 1) * (cell_count - 1)));
    }
    const ZBufferResult par = zbuffer_parallel(depths, cells, cell_count);
    const ZBufferResult ser = zbuffer_serial_oracle(depths, cells, cell_count);
    CHECK(par.visible == ser.visible);
    CHECK(par.zbuffer == ser.zbuffer);
    if (trial < 3) CHECK(par.visible == brute_force_visible(depths, cells));

    // Monotone progress and the multiplicity bound.
    std::vector<std::size_t> multiplicity(cell_count, 0);
    for (auto c : cells) ++multiplicity[c];
    const std::size_t max_mult =
        *std::max_element(multiplicity.begin(), multiplicity.end());
    CHECK(par.iterations >= 1);
    CHECK(static_cast<std::size_t>(par.iterations) <= max_mult);
    for (std::size_t r = 1; r < par.pending_per_round.size(); ++r)
      CHECK(par.pending_per_round[r] < par.pending_per_round[r - 1]);
    CHECK(par.pending_per_round.back() == 0);

    // Visibility soundness: visible points sit exactly at their cell's
    // buffer value, excluded points strictly behind it.
    for (std::size_t p = 0; p < n; ++p) {
      if (par.visible[p])
        CHECK(depths[p] == par.zbuffer[cells[p]]);
      else
        CHECK(depths[p] > par.zbuffer[cells[p]]);
    }
  }
}

TEST_CASE("threaded scatter agrees with the deterministic mode") {
  std::vector<double> depths;
  std::vector<std::int64_t> cells;
  for (int k = 0; k < 20000; ++k) {
    depths.push_back(testing::uniform(0.5, 80.0));
    cells.push_back(static_cast<std::int64_t>(testing::uniform(0, 1) * 4095));
  }
  const ZBufferResult ser = zbuffer_serial_oracle(depths, cells, 4096);
  for (int threads : {2, 4}) {
    ZBufferOptions options;
    options.threads = threads;
    const ZBufferResult par = zbuffer_parallel(depths, cells, 4096, options);
    CHECK(par.visible == ser.visible);
    CHECK(par.zbuffer == ser.zbuffer);
  }
}

TEST_CASE("heuristic filter boundary semantics") {
  DepthMap target(4, 4);
  target.set(3, 1, 5.0);  // cell 7
  const std::vector<std::int64_t> cells{7};

  CHECK(heuristic_filter(std::vector<double>{5.0}, target, cells, 0.0) ==
        std::vector<std::uint8_t>{1});
  CHECK(heuristic_filter(std::vector<double>{5.01}, target, cells, 0.0) ==
        std::vector<std::uint8_t>{0});
  CHECK(heuristic_filter(std::vector<double>{5.01}, target, cells, 0.02) ==
        std::vector<std::uint8_t>{1});
  // Invalid target depth passes everything.
  CHECK(heuristic_filter(std::vector<double>{99.0}, target,
                         std::vector<std::int64_t>{0}, 0.0) ==
        std::vector<std::uint8_t>{1});
  CHECK_THROWS_AS(heuristic_filter(std::vector<double>{1.0}, target,
                                   std::vector<std::int64_t>{16}, 0.0),
                  InvalidInput);
}

TEST_CASE("heuristic filter trips over prediction noise, z-buffer does not") {
  const SceneSpec spec = heuristic_noise_spec();
  const GroundTruth gt = generate(spec);
  const Intrinsics& intr = spec.camera_t.intrinsics;

  const DepthMap noisy_t = perturb_depth(gt.depth_t, 0.05, 11);
  const DepthMap noisy_t1 = perturb_depth(gt.depth_t1, 0.05, 12);

  const PointCloud cloud = transform(inverse_project(noisy_t, intr),
                                     invert(relative_pose(spec)));
  const ProjectionOutcome outcome = project(cloud, intr);
  const InFrameSubset subset = in_frame_positive_subset(outcome);

  const ZBufferResult zres =
      zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());
  const std::vector<std::uint8_t> heur =
      heuristic_filter(subset.depths, noisy_t1, subset.cells, 0.0);

  std::size_t zbuffer_false_exclusions = 0;
  std::size_t heuristic_false_exclusions = 0;
  for (std::size_t s = 0; s < subset.size(); ++s) {
    const auto [i, j] = cloud.source_pixels()[subset.point_indices[s]];
    if (!gt.visible_t_to_t1[gt.depth_t.index(i, j)]) continue;
    if (!zres.visible[s]) ++zbuffer_false_exclusions;
    if (!heur[s]) ++heuristic_false_exclusions;
  }
  CHECK(zbuffer_false_exclusions == 0);
  CHECK(heuristic_false_exclusions > 0);
}

TEST_CASE("register_visible stores winners at their cells") {
  const Intrinsics intr(1, 1, 0, 0, 4, 4);

  SUBCASE("single visible point") {
    const PointCloud cloud({Vec3(1, 2, 3)}, {{0, 0}}, 4, 4);
    // Point (1,2,3) projects to u=1/3,v=2/3 -> cell (0,1) under rounding.
    const ProjectionOutcome outcome = project(cloud, intr);
    const InFrameSubset subset = in_frame_positive_subset(outcome);
    const ZBufferResult zres =
        zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());
    const Registration reg = register_visible(cloud, outcome, zres, intr);
    CHECK(reg.populated_count() == 1);
    CHECK(reg.populated(0, 1));
    CHECK(reg.coords(0, 1) == Vec3(1, 2, 3));
  }

  SUBCASE("occluded pair keeps only the nearer point") {
    const PointCloud cloud({Vec3(0, 0, 5), Vec3(0, 0, 3)}, {{0, 0}, {1, 0}}, 4,
                           4);
    const ProjectionOutcome outcome = project(cloud, intr);
    const InFrameSubset subset = in_frame_positive_subset(outcome);
    const ZBufferResult zres =
        zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());
    const Registration reg = register_visible(cloud, outcome, zres, intr);
    CHECK(reg.populated_count() == 1);
    CHECK(reg.coords(0, 0) == Vec3(0, 0, 3));
  }

  SUBCASE("depth tie goes to the lowest point index") {
    const PointCloud cloud({Vec3(0, 0, 3), Vec3(0.2, 0, 3)}, {{0, 0}, {1, 0}},
                           4, 4);
    const ProjectionOutcome outcome = project(cloud, intr);
    REQUIRE(outcome.raster_index[0] == outcome.raster_index[1]);
    const InFrameSubset subset = in_frame_positive_subset(outcome);
    const ZBufferResult zres =
        zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());
    CHECK(zres.visible == std::vector<std::uint8_t>{1, 1});
    const Registration reg = register_visible(cloud, outcome, zres, intr);
    CHECK(reg.coords(0, 0) == Vec3(0, 0, 3));
  }
}

TEST_CASE("identity-transform scene registers back onto itself") {
  const Intrinsics intr(10, 10, 4.5, 4.5, 10, 10);
  DepthMap dm(10, 10);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i)
      if ((i + j) % 3 != 0) dm.set(i, j, testing::uniform(1.0, 20.0));

  const PointCloud cloud = inverse_project(dm, intr);
  const ProjectionOutcome outcome = project(cloud, intr);
  const InFrameSubset subset = in_frame_positive_subset(outcome);
  const ZBufferResult zres =
      zbuffer_parallel(subset.depths, subset.cells, intr.pixel_count());
  const Registration reg = register_visible(cloud, outcome, zres, intr);
  const Registration expected = registration_from_cloud(cloud, intr);

  REQUIRE(reg.populated_count() == expected.populated_count());
  for (int j = 0; j < 10; ++j) {
    for (int i = 0; i < 10; ++i) {
      CHECK(reg.populated(i, j) == expected.populated(i, j));
      if (reg.populated(i, j)) CHECK(reg.coords(i, j) == expected.coords(i, j));
    }
  }
}
