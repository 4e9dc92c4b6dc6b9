#include "reproj/jsonio.hpp"

#include <fstream>
#include <sstream>

namespace reproj {

using nlohmann::json;

namespace {

json field(const json& j, const char* name) {
  if (!j.contains(name))
    throw FormatError(std::string("missing field \"") + name + "\"", 0);
  return j.at(name);
}

Texture texture_from_json(const json& j) {
  Texture tex;
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "constant")
    tex.kind = TextureKind::Constant;
  else if (kind == "smooth_gradient")
    tex.kind = TextureKind::SmoothGradient;
  else if (kind == "checkerboard")
    tex.kind = TextureKind::Checkerboard;
  else
    throw FormatError("unknown texture kind \"" + kind + "\"", 0);
  tex.base = field(j, "base").get<std::array<double, 3>>();
  tex.amplitude = j.value("amplitude", tex.amplitude);
  tex.freq_x = j.value("freq_x", 0.0);
  tex.freq_y = j.value("freq_y", 0.0);
  tex.phase = j.value("phase", 0.0);
  tex.alt = j.value("alt", tex.alt);
  tex.tile = j.value("tile", 1.0);
  return tex;
}

json texture_to_json(const Texture& tex) {
  const char* kind = tex.kind == TextureKind::Constant ? "constant"
                     : tex.kind == TextureKind::SmoothGradient
                         ? "smooth_gradient"
                         : "checkerboard";
  return json{{"kind", kind},          {"base", tex.base},
              {"amplitude", tex.amplitude}, {"freq_x", tex.freq_x},
              {"freq_y", tex.freq_y},  {"phase", tex.phase},
              {"alt", tex.alt},        {"tile", tex.tile}};
}

}  // namespace

json to_json(const Intrinsics& intr) {
  return json{{"fx", intr.fx},       {"fy", intr.fy},
              {"cx", intr.cx},       {"cy", intr.cy},
              {"width", intr.width}, {"height", intr.height}};
}

json to_json(const RigidTransform& pose) {
  std::array<double, 9> rotation;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rotation[r * 3 + c] = pose.rotation(r, c);
  return json{{"rotation", rotation},
              {"translation", std::array<double, 3>{pose.translation.x(),
                                                    pose.translation.y(),
                                                    pose.translation.z()}}};
}

json to_json(const SceneSpec& spec) {
  json prims = json::array();
  for (const Primitive& p : spec.primitives) {
    prims.push_back(json{{"z", p.z},
                         {"infinite", p.infinite},
                         {"x0", p.x0},
                         {"x1", p.x1},
                         {"y0", p.y0},
                         {"y1", p.y1},
                         {"texture", texture_to_json(p.texture)}});
  }
  return json{
      {"seed", spec.seed},
      {"noise_amplitude", spec.noise_amplitude},
      {"camera_t",
       json{{"intrinsics", to_json(spec.camera_t.intrinsics)},
            {"world_to_camera", to_json(spec.camera_t.world_to_camera)}}},
      {"camera_t1",
       json{{"intrinsics", to_json(spec.camera_t1.intrinsics)},
            {"world_to_camera", to_json(spec.camera_t1.world_to_camera)}}},
      {"primitives", prims}};
}

Intrinsics intrinsics_from_json(const json& j) {
  return Intrinsics(field(j, "fx").get<double>(), field(j, "fy").get<double>(),
                    field(j, "cx").get<double>(), field(j, "cy").get<double>(),
                    field(j, "width").get<int>(),
                    field(j, "height").get<int>());
}

RigidTransform pose_from_json(const json& j) {
  const auto rotation = field(j, "rotation").get<std::array<double, 9>>();
  const auto translation = field(j, "translation").get<std::array<double, 3>>();
  Mat3 r;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r(row, col) = rotation[row * 3 + col];
  return RigidTransform(r, Vec3(translation[0], translation[1], translation[2]));
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec spec;
  spec.seed = field(j, "seed").get<std::uint64_t>();
  spec.noise_amplitude = j.value("noise_amplitude", 0.0);
  const json cam_t = field(j, "camera_t");
  const json cam_t1 = field(j, "camera_t1");
  spec.camera_t = {intrinsics_from_json(field(cam_t, "intrinsics")),
                   pose_from_json(field(cam_t, "world_to_camera"))};
  spec.camera_t1 = {intrinsics_from_json(field(cam_t1, "intrinsics")),
                    pose_from_json(field(cam_t1, "world_to_camera"))};
  for (const json& p : field(j, "primitives")) {
    Primitive prim;
    prim.z = field(p, "z").get<double>();
    prim.infinite = p.value("infinite", false);
    prim.x0 = p.value("x0", 0.0);
    prim.x1 = p.value("x1", 0.0);
    prim.y0 = p.value("y0", 0.0);
    prim.y1 = p.value("y1", 0.0);
    prim.texture = texture_from_json(field(p, "texture"));
    spec.primitives.push_back(prim);
  }
  return spec;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(e.what(), e.byte);
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str());
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

Intrinsics read_intrinsics_file(const std::filesystem::path& path) {
  return intrinsics_from_json(load_json_file(path));
}

RigidTransform read_pose_file(const std::filesystem::path& path) {
  return pose_from_json(load_json_file(path));
}

}  // namespace reproj
