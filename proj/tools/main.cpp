#include "commands.hpp"

#include "reproj/types.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

namespace {

void add_common_options(CLI::App* cmd, reproj::cli::Config& config) {
  auto* seed =
      cmd->add_option("--scene-seed", config.scene_seed, "Generate a synthetic scene from this seed");
  auto* frames = cmd->add_option(
      "--frames", config.frames_dir,
      "Directory with image_t.ppm, image_t1.ppm, depth_t.pfm, depth_t1.pfm, "
      "pose.json, intrinsics.json");
  seed->excludes(frames);
  frames->excludes(seed);
  frames->check(CLI::ExistingDirectory);
  cmd->add_option("--scene", config.scene_kind,
                  "Synthetic scene family (with --scene-seed)")
      ->check(CLI::IsMember({"kitti", "random", "smooth", "identity",
                             "occlusion", "two-plane", "negative-depth",
                             "heuristic-noise"}));
  cmd->add_option("--occlusion", config.occlusion, "Occlusion handling")
      ->check(CLI::IsMember({"none", "zbuffer", "heuristic"}));
  cmd->add_option("--lambda1", config.lambda1, "Point loss weight");
  cmd->add_option("--lambda2", config.lambda2, "Image loss weight");
  cmd->add_option("--lambda3", config.lambda3, "SSIM loss weight");
  cmd->add_option("--lambda4", config.lambda4, "Negative-depth loss weight");
  cmd->add_option("--heuristic-tol", config.heuristic_tol,
                  "Tolerance of the minimum-depth heuristic (meters)");
  cmd->add_option("--noise", config.noise,
                  "Uniform depth perturbation amplitude (meters)");
  cmd->add_option("--threads", config.threads, "Z-buffer worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", config.out_dir, "Directory for report (and frame) files");
  cmd->add_option("--format", config.format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));

  cmd->callback([&config, seed] { config.has_scene_seed = seed->count() > 0; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-transformation losses with exact z-buffer occlusion handling"};
  app.require_subcommand(1);

  reproj::cli::Config config;
  std::function<int()> run;

  auto* losses = app.add_subcommand(
      "losses", "Evaluate the bidirectional loss stack on a frame pair");
  add_common_options(losses, config);
  losses->callback([&] { run = [&] { return reproj::cli::cmd_losses(config); }; });

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Verify analytic depth gradients against finite differences");
  add_common_options(gradcheck, config);
  gradcheck->add_option("--step", config.step, "Central-difference step (meters)")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--skip-margin", config.skip_margin,
                        "Cell-edge proximity treated as non-smooth (pixels)");
  gradcheck->add_option("--corrupt-gradient", config.corrupt_gradient,
                        "Negative control: offset added to analytic entries");
  gradcheck->callback(
      [&] { run = [&] { return reproj::cli::cmd_gradcheck(config); }; });

  auto* stats = app.add_subcommand(
      "zbuf-stats", "Report z-buffer iteration behavior and oracle agreement");
  add_common_options(stats, config);
  stats->callback(
      [&] { run = [&] { return reproj::cli::cmd_zbuf_stats(config); }; });

  auto* bench = app.add_subcommand("bench", "Time the z-buffer on KITTI-sized frames");
  add_common_options(bench, config);
  bench->add_option("--repeats", config.repeats, "Timing repetitions")
      ->check(CLI::PositiveNumber);
  bench->callback([&] { run = [&] { return reproj::cli::cmd_bench(config); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run();
  } catch (const reproj::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const reproj::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const reproj::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
