#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "attrilens/core/io.hpp"
#include "attrilens/version.hpp"
#include "json.hpp"

namespace attrilens::cli {

/// Record of one CLI run, stored next to the artifacts it produced.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string tool_version = kVersion;
  double wall_time_s = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["wall_time_s"] = wall_time_s;
    return j;
  }

  static RunManifest from_json(const nlohmann::ordered_json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_time_s = j.at("wall_time_s").get<double>();
    return m;
  }

  void write(const std::filesystem::path& path) const { io::write_file_atomic(path, to_json().dump(2) + "\n"); }
};

/// `<artifact>.manifest.json` beside the artifact.
inline std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

}  // namespace attrilens::cli
