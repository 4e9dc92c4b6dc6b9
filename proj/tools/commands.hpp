#pragma once

#include <cstdint>
#include <string>

namespace reproj::cli {

struct Config {
  bool has_scene_seed = false;
  std::uint64_t scene_seed = 0;
  std::string scene_kind;  // empty = per-command default
  std::string frames_dir;

  std::string occlusion = "zbuffer";
  double lambda1 = 0.005;
  double lambda2 = 10.0;
  double lambda3 = 2.0;
  double lambda4 = 2.0;
  double heuristic_tol = 0.0;
  double noise = 0.0;
  int threads = 1;
  std::string out_dir;
  std::string format = "text";

  // gradcheck
  double step = 1e-4;
  double skip_margin = 1e-3;
  double corrupt_gradient = 0.0;

  // bench
  int repeats = 5;
};

int cmd_losses(const Config& config);
int cmd_gradcheck(const Config& config);
int cmd_zbuf_stats(const Config& config);
int cmd_bench(const Config& config);

}  // namespace reproj::cli
