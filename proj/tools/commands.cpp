#include "commands.hpp"

#include "reproj/gradcheck.hpp"
#include "reproj/imageio.hpp"
#include "reproj/jsonio.hpp"
#include "reproj/pipeline.hpp"
#include "reproj/scene.hpp"
#include "reproj/zbuffer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace reproj::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool deterministic_forced() {
  const char* v = std::getenv("ZBUF_DETERMINISTIC");
  return v != nullptr && std::string(v) == "1";
}

OcclusionMode parse_occlusion(const std::string& name) {
  if (name == "none") return OcclusionMode::None;
  if (name == "zbuffer") return OcclusionMode::ZBuffer;
  if (name == "heuristic") return OcclusionMode::Heuristic;
  throw InvalidInput("unknown occlusion mode \"" + name + "\"");
}

LossWeights weights_of(const Config& config) {
  LossWeights w{config.lambda1, config.lambda2, config.lambda3, config.lambda4};
  if (w.point < 0 || w.image < 0 || w.ssim < 0 || w.negative_depth < 0)
    throw InvalidInput("loss weights must be nonnegative");
  return w;
}

SceneSpec spec_of(const std::string& kind, std::uint64_t seed) {
  if (kind == "kitti") return kitti_like_spec(seed);
  if (kind == "random") return random_scene_spec(seed);
  if (kind == "smooth") return smooth_scene_spec(seed);
  if (kind == "identity") return identity_scene_spec(seed);
  if (kind == "occlusion") return occlusion_scene_spec(seed);
  if (kind == "two-plane") return two_plane_occlusion_spec();
  if (kind == "negative-depth") return negative_depth_spec();
  if (kind == "heuristic-noise") return heuristic_noise_spec();
  throw InvalidInput("unknown scene kind \"" + kind + "\"");
}

struct ProblemBundle {
  LossProblem problem;
  std::optional<SceneSpec> spec;
  std::optional<GroundTruth> gt;
};

ProblemBundle load_problem(const Config& config,
                           const std::string& default_scene) {
  const int threads = deterministic_forced() ? 1 : config.threads;

  if (!config.frames_dir.empty()) {
    const fs::path dir(config.frames_dir);
    FrameObservation frame_t{read_image_file(dir / "image_t.ppm"),
                             read_depth_file(dir / "depth_t.pfm")};
    FrameObservation frame_t1{read_image_file(dir / "image_t1.ppm"),
                              read_depth_file(dir / "depth_t1.pfm")};
    if (config.noise > 0.0) {
      frame_t.depth = perturb_depth(frame_t.depth, config.noise, config.scene_seed);
      frame_t1.depth =
          perturb_depth(frame_t1.depth, config.noise, config.scene_seed + 1);
    }
    LossProblem problem{std::move(frame_t),
                        std::move(frame_t1),
                        read_pose_file(dir / "pose.json"),
                        read_intrinsics_file(dir / "intrinsics.json"),
                        weights_of(config),
                        parse_occlusion(config.occlusion),
                        config.heuristic_tol,
                        {threads, nullptr}};
    return {std::move(problem), std::nullopt, std::nullopt};
  }

  const std::string kind =
      config.scene_kind.empty() ? default_scene : config.scene_kind;
  SceneSpec spec = spec_of(kind, config.scene_seed);
  spec.noise_amplitude = config.noise;
  GroundTruth gt = generate(spec);
  LossProblem problem =
      scene_problem(spec, gt, weights_of(config), parse_occlusion(config.occlusion),
                    config.heuristic_tol, config.noise);
  problem.zbuffer_options.threads = threads;
  return {std::move(problem), std::move(spec), std::move(gt)};
}

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k)
      flatten(j[k], prefix + "[" + std::to_string(k) + "]", out);
  } else {
    out << prefix << " = " << j.dump() << "\n";
  }
}

void emit_report(const Config& config, const json& report) {
  if (config.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else if (config.format == "text") {
    flatten(report, "", std::cout);
  } else {
    throw InvalidInput("unknown report format \"" + config.format + "\"");
  }
  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    if (config.format == "json") {
      write_json_file(fs::path(config.out_dir) / "report.json", report);
    } else {
      std::ofstream out(fs::path(config.out_dir) / "report.txt");
      flatten(report, "", out);
    }
  }
}

json direction_json(const DirectionEval& eval) {
  return json{{"total_points", eval.stats.total_points},
              {"out_of_frame", eval.stats.out_of_frame},
              {"negative_in_frame", eval.stats.negative_in_frame},
              {"in_frame_positive", eval.stats.in_frame_positive},
              {"occlusion_excluded", eval.stats.occlusion_excluded},
              {"zbuffer_iterations", eval.stats.zbuffer_iterations},
              {"zbuffer_pending_per_round", eval.stats.zbuffer_pending_per_round}};
}

json config_json(const Config& config, const std::string& default_scene) {
  json j{{"occlusion", config.occlusion},
         {"lambda1", config.lambda1},
         {"lambda2", config.lambda2},
         {"lambda3", config.lambda3},
         {"lambda4", config.lambda4},
         {"heuristic_tol", config.heuristic_tol},
         {"noise", config.noise},
         {"threads", deterministic_forced() ? 1 : config.threads},
         {"format", config.format}};
  if (!config.frames_dir.empty()) {
    j["frames"] = config.frames_dir;
  } else {
    j["scene"] = config.scene_kind.empty() ? default_scene : config.scene_kind;
    j["scene_seed"] = config.scene_seed;
  }
  return j;
}

void write_frames(const fs::path& dir, const ProblemBundle& bundle) {
  write_image_file(dir / "image_t.ppm", bundle.problem.frame_t.image);
  write_image_file(dir / "image_t1.ppm", bundle.problem.frame_t1.image);
  write_depth_file(dir / "depth_t.pfm", bundle.problem.frame_t.depth);
  write_depth_file(dir / "depth_t1.pfm", bundle.problem.frame_t1.depth);
  write_json_file(dir / "pose.json", to_json(bundle.problem.pose));
  write_json_file(dir / "intrinsics.json", to_json(bundle.problem.intrinsics));
  if (bundle.spec) write_json_file(dir / "scene_spec.json", to_json(*bundle.spec));
}

}  // namespace

int cmd_losses(const Config& config) {
  ProblemBundle bundle = load_problem(config, "kitti");
  const PipelineResult res = evaluate_pipeline(bundle.problem);

  json report{
      {"schema_version", 1},
      {"command", "losses"},
      {"config", config_json(config, "kitti")},
      {"losses",
       json{{"point", res.breakdown.point},
            {"image", res.breakdown.image},
            {"ssim", res.breakdown.ssim},
            {"negative_depth", res.breakdown.negative_depth},
            {"total", res.breakdown.total},
            {"contributing",
             json{{"point_cells", res.breakdown.contributing.point_cells},
                  {"image_points", res.breakdown.contributing.image_points},
                  {"ssim_patches", res.breakdown.contributing.ssim_patches},
                  {"negative_points",
                   res.breakdown.contributing.negative_points}}}}},
      {"negative_set_size", res.t1_to_t.stats.negative_in_frame +
                                res.t_to_t1.stats.negative_in_frame},
      {"directions", json{{"t1_to_t", direction_json(res.t1_to_t)},
                          {"t_to_t1", direction_json(res.t_to_t1)}}}};
  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    write_frames(config.out_dir, bundle);
  }
  emit_report(config, report);
  return 0;
}

int cmd_gradcheck(const Config& config) {
  ProblemBundle bundle = load_problem(config, "smooth");
  const GradCheckReport check = finite_diff_check(
      bundle.problem, config.step, config.skip_margin, config.corrupt_gradient);

  constexpr double kThreshold = 1e-4;
  const bool pass = check.max_relative_error < kThreshold;
  json report{{"schema_version", 1},
              {"command", "gradcheck"},
              {"config", config_json(config, "smooth")},
              {"step", config.step},
              {"skip_margin", config.skip_margin},
              {"max_relative_error", check.max_relative_error},
              {"threshold", kThreshold},
              {"pixels_checked", check.pixels_checked},
              {"pixels_skipped_nonsmooth", check.pixels_skipped_nonsmooth},
              {"pass", pass}};
  emit_report(config, report);
  return pass ? 0 : 1;
}

int cmd_zbuf_stats(const Config& config) {
  ProblemBundle bundle = load_problem(config, "kitti");
  // Occlusion mode is irrelevant here; the z-buffer is run explicitly.
  json directions;
  bool agree_all = true;
  const struct {
    const char* name;
    const FrameObservation* source;
  } runs[2] = {{"t1_to_t", &bundle.problem.frame_t1},
               {"t_to_t1", &bundle.problem.frame_t}};
  for (int d = 0; d < 2; ++d) {
    const RigidTransform pose =
        d == 0 ? bundle.problem.pose : invert(bundle.problem.pose);
    const PointCloud cloud = transform(
        inverse_project(runs[d].source->depth, bundle.problem.intrinsics), pose);
    const ProjectionOutcome outcome =
        project(cloud, bundle.problem.intrinsics);
    const InFrameSubset subset = in_frame_positive_subset(outcome);
    const std::size_t cells = bundle.problem.intrinsics.pixel_count();

    const ZBufferResult parallel = zbuffer_parallel(
        subset.depths, subset.cells, cells, bundle.problem.zbuffer_options);
    const ZBufferResult oracle =
        zbuffer_serial_oracle(subset.depths, subset.cells, cells);
    const bool agree = parallel.visible == oracle.visible &&
                       parallel.zbuffer == oracle.zbuffer;
    agree_all = agree_all && agree;

    std::vector<std::size_t> per_cell(cells, 0);
    for (const std::int64_t c : subset.cells) ++per_cell[c];
    std::map<std::size_t, std::size_t> histogram;
    for (const std::size_t m : per_cell)
      if (m > 0) ++histogram[m];
    json hist_json;
    for (const auto& [multiplicity, count] : histogram)
      hist_json[std::to_string(multiplicity)] = count;

    directions[runs[d].name] =
        json{{"points", subset.size()},
             {"iterations", parallel.iterations},
             {"pending_per_round", parallel.pending_per_round},
             {"cell_multiplicity_histogram", hist_json},
             {"oracle_agreement", agree}};
  }

  json report{{"schema_version", 1},
              {"command", "zbuf_stats"},
              {"config", config_json(config, "kitti")},
              {"directions", directions},
              {"oracle_agreement", agree_all}};
  emit_report(config, report);
  return 0;
}

int cmd_bench(const Config& config) {
  if (config.threads < 1) throw InvalidInput("thread count must be >= 1");
  ProblemBundle bundle = load_problem(config, "kitti");
  const Intrinsics& intr = bundle.problem.intrinsics;

  const PointCloud cloud = transform(
      inverse_project(bundle.problem.frame_t1.depth, intr), bundle.problem.pose);
  const ProjectionOutcome outcome = project(cloud, intr);
  const InFrameSubset subset = in_frame_positive_subset(outcome);
  const std::size_t cells = intr.pixel_count();

  const auto median_ms = [&](auto&& run) {
    std::vector<double> samples;
    for (int r = 0; r < std::max(1, config.repeats); ++r) {
      const auto start = std::chrono::steady_clock::now();
      run();
      const auto stop = std::chrono::steady_clock::now();
      samples.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
  };

  const ZBufferResult reference =
      zbuffer_serial_oracle(subset.depths, subset.cells, cells);
  const double serial_ms = median_ms(
      [&] { zbuffer_serial_oracle(subset.depths, subset.cells, cells); });

  std::vector<int> thread_counts{1};
  if (!deterministic_forced())
    for (int t = 2; t <= config.threads; t *= 2) thread_counts.push_back(t);

  bool agree_all = true;
  double single_thread_ms = 0.0;
  json runs = json::array();
  for (const int threads : thread_counts) {
    const ZBufferOptions opts{threads, nullptr};
    const ZBufferResult result =
        zbuffer_parallel(subset.depths, subset.cells, cells, opts);
    const bool agree = result.visible == reference.visible;
    agree_all = agree_all && agree;
    const double ms = median_ms(
        [&] { zbuffer_parallel(subset.depths, subset.cells, cells, opts); });
    if (threads == 1) single_thread_ms = ms;
    runs.push_back(json{{"threads", threads},
                        {"median_ms", ms},
                        {"points_per_second", subset.size() / (ms / 1000.0)},
                        {"visible_matches_oracle", agree}});
  }

  json report{{"schema_version", 1},
              {"command", "bench"},
              {"config", config_json(config, "kitti")},
              {"frame_points", intr.pixel_count()},
              {"zbuffer_points", subset.size()},
              {"serial_oracle_median_ms", serial_ms},
              {"parallel", runs},
              {"oracle_agreement", agree_all},
              {"single_thread_under_100ms", single_thread_ms < 100.0}};
  if (single_thread_ms >= 100.0)
    std::cerr << "warning: single-threaded z-buffer took " << single_thread_ms
              << " ms on a " << subset.size()
              << "-point frame (soft target is 100 ms)\n";
  emit_report(config, report);
  return 0;
}

}  // namespace reproj::cli
