#pragma once

#include "reproj/scene.hpp"
#include "reproj/types.hpp"

#include <json.hpp>

#include <filesystem>

namespace reproj {

// JSON schemas shared by the CLI and the on-disk frame layout:
//   intrinsics.json  {"fx","fy","cx","cy","width","height"}
//   pose.json        {"rotation": 9 numbers row-major, "translation": 3}
//   scene spec       nested cameras and primitive list, schema below

nlohmann::json to_json(const Intrinsics& intr);
nlohmann::json to_json(const RigidTransform& pose);
nlohmann::json to_json(const SceneSpec& spec);

Intrinsics intrinsics_from_json(const nlohmann::json& j);
RigidTransform pose_from_json(const nlohmann::json& j);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

/// Parses a JSON document; syntax errors come back as FormatError carrying
/// the parser's byte offset.
nlohmann::json parse_json(const std::string& text);

nlohmann::json load_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& j);

Intrinsics read_intrinsics_file(const std::filesystem::path& path);
RigidTransform read_pose_file(const std::filesystem::path& path);

}  // namespace reproj
