#include "reproj/zbuffer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace reproj {

namespace {

constexpr double kEmpty = std::numeric_limits<double>::infinity();

void validate_inputs(std::span<const double> depths,
                     std::span<const std::int64_t> cells,
                     std::size_t cell_count) {
  if (depths.size() != cells.size())
    throw InvalidInput("zbuffer: depths and raster indices differ in length");
  for (std::size_t p = 0; p < depths.size(); ++p) {
    if (!std::isfinite(depths[p]) || depths[p] <= 0.0)
      throw InvalidInput("zbuffer: depths must be finite and positive");
    if (cells[p] < 0 || static_cast<std::size_t>(cells[p]) >= cell_count)
      throw InvalidInput("zbuffer: raster index outside [0, cell_count)");
  }
}

// Splits [0, n) into roughly equal chunks and runs fn(begin, end) on each
// from its own thread.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t t = std::max(1, threads);
  if (t == 1 || n == 0) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<std::size_t> ZBufferResult::visible_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < visible.size(); ++p)
    if (visible[p]) out.push_back(p);
  return out;
}

std::size_t ZBufferResult::visible_count() const {
  std::size_t n = 0;
  for (auto v : visible) n += v != 0;
  return n;
}

ZBufferResult zbuffer_parallel(std::span<const double> depths,
                               std::span<const std::int64_t> cells,
                               std::size_t cell_count,
                               const ZBufferOptions& options) {
  validate_inputs(depths, cells, cell_count);
  const std::size_t n = depths.size();
  if (options.scatter_order && options.scatter_order->size() != n)
    throw InvalidInput("zbuffer: scatter_order must be a permutation of the points");

  ZBufferResult result;
  result.zbuffer.assign(cell_count, kEmpty);

  const bool threaded = options.threads > 1 && !options.scatter_order;
  // Threaded scatter needs stores that are atomic at value granularity.
  std::vector<std::atomic<double>> atomic_buffer(threaded ? cell_count : 0);
  if (threaded)
    for (auto& c : atomic_buffer) c.store(kEmpty, std::memory_order_relaxed);

  std::vector<std::uint32_t> active(n);
  if (options.scatter_order) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t p = (*options.scatter_order)[r];
      if (p >= n) throw InvalidInput("zbuffer: scatter_order entry out of range");
      active[r] = static_cast<std::uint32_t>(p);
    }
  } else {
    for (std::size_t p = 0; p < n; ++p) active[p] = static_cast<std::uint32_t>(p);
  }

  // Safety valve only; monotone contraction bounds the rounds by the number
  // of points, so reaching the cap means the invariant broke.
  const std::size_t max_rounds = std::max(cell_count, n) + 1;
  std::size_t previous_pending = n + 1;

  while (true) {
    if (static_cast<std::size_t>(result.iterations) >= max_rounds)
      throw InternalError("zbuffer: round cap exceeded; contraction is not monotone");
    ++result.iterations;

    // Scatter: any competing writer may win a cell this round.
    if (threaded) {
      parallel_chunks(active.size(), options.threads,
                      [&](std::size_t begin, std::size_t end) {
                        for (std::size_t k = begin; k < end; ++k) {
                          const std::uint32_t p = active[k];
                          atomic_buffer[cells[p]].store(
                              depths[p], std::memory_order_relaxed);
                        }
                      });
      for (std::size_t c = 0; c < cell_count; ++c)
        result.zbuffer[c] = atomic_buffer[c].load(std::memory_order_relaxed);
    } else {
      for (const std::uint32_t p : active) result.zbuffer[cells[p]] = depths[p];
    }

    // Gather and contract to points strictly nearer than the stored value.
    std::vector<std::uint32_t> contracted;
    for (const std::uint32_t p : active) {
      if (depths[p] < result.zbuffer[cells[p]]) contracted.push_back(p);
    }
    result.pending_per_round.push_back(contracted.size());
    if (contracted.size() >= previous_pending)
      throw InternalError("zbuffer: contracted set failed to shrink");
    previous_pending = contracted.size();

    if (contracted.empty()) break;
    active = std::move(contracted);
  }

  // Final gather over the original arrays decides visibility by equality.
  result.visible.assign(n, 0);
  parallel_chunks(n, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      result.visible[p] = depths[p] == result.zbuffer[cells[p]] ? 1 : 0;
  });
  return result;
}

ZBufferResult zbuffer_serial_oracle(std::span<const double> depths,
                                    std::span<const std::int64_t> cells,
                                    std::size_t cell_count) {
  validate_inputs(depths, cells, cell_count);
  ZBufferResult result;
  result.zbuffer.assign(cell_count, kEmpty);
  result.iterations = 1;
  result.pending_per_round = {0};
  for (std::size_t p = 0; p < depths.size(); ++p) {
    double& slot = result.zbuffer[cells[p]];
    slot = std::min(slot, depths[p]);
  }
  result.visible.assign(depths.size(), 0);
  for (std::size_t p = 0; p < depths.size(); ++p)
    result.visible[p] = depths[p] == result.zbuffer[cells[p]] ? 1 : 0;
  return result;
}

std::vector<std::uint8_t> heuristic_filter(
    std::span<const double> depths, const DepthMap& target_depth,
    std::span<const std::int64_t> cells, double tolerance) {
  if (depths.size() != cells.size())
    throw InvalidInput("heuristic_filter: depths and raster indices differ in length");
  const std::size_t cell_count =
      static_cast<std::size_t>(target_depth.width()) * target_depth.height();
  std::vector<std::uint8_t> visible(depths.size(), 0);
  for (std::size_t p = 0; p < depths.size(); ++p) {
    if (cells[p] < 0 || static_cast<std::size_t>(cells[p]) >= cell_count)
      throw InvalidInput("heuristic_filter: raster index outside the target frame");
    const std::size_t c = static_cast<std::size_t>(cells[p]);
    const bool target_valid = target_depth.validity()[c] != 0;
    visible[p] =
        (!target_valid || depths[p] <= target_depth.values()[c] + tolerance) ? 1
                                                                             : 0;
  }
  return visible;
}

InFrameSubset in_frame_positive_subset(const ProjectionOutcome& outcome) {
  InFrameSubset subset;
  for (std::size_t p = 0; p < outcome.size(); ++p) {
    if (outcome.status[p] != PointStatus::InFramePositive) continue;
    subset.depths.push_back(outcome.depth[p]);
    subset.cells.push_back(outcome.raster_index[p]);
    subset.point_indices.push_back(static_cast<std::uint32_t>(p));
  }
  return subset;
}

Registration register_visible(const PointCloud& cloud,
                              const ProjectionOutcome& outcome,
                              const ZBufferResult& zres,
                              const Intrinsics& intr) {
  if (outcome.size() != cloud.size())
    throw InvalidInput("register_visible: outcome does not match cloud");
  const InFrameSubset subset = in_frame_positive_subset(outcome);
  if (zres.visible.size() != subset.size())
    throw InvalidInput(
        "register_visible: z-buffer result does not cover the in-frame subset");

  Registration reg(intr.height, intr.width);
  // Ascending subset order is ascending point order, so the first visible
  // writer at a cell is the lowest-index one.
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (!zres.visible[s]) continue;
    const std::size_t cell = static_cast<std::size_t>(subset.cells[s]);
    if (reg.populated_at(cell)) continue;
    reg.store(cell, cloud.points()[subset.point_indices[s]]);
  }
  return reg;
}

Registration registration_from_cloud(const PointCloud& cloud,
                                     const Intrinsics& intr) {
  if (cloud.origin_width() != intr.width || cloud.origin_height() != intr.height)
    throw InvalidInput(
        "registration_from_cloud: cloud origin frame does not match intrinsics");
  Registration reg(intr.height, intr.width);
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    const auto [i, j] = cloud.source_pixels()[p];
    reg.store(reg.index(i, j), cloud.points()[p]);
  }
  return reg;
}

}  // namespace reproj
