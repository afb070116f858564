#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rowpilot/control.hpp"
#include "rowpilot/depth.hpp"
#include "rowpilot/fallback.hpp"
#include "rowpilot/sim.hpp"
#include "rowpilot/world.hpp"

namespace rowpilot {

/// Every tunable of the planner and the simulator. Keys are flat and
/// namespaced, e.g. `pipeline.t_distance`.
struct Config {
  DepthPipelineParams pipeline;
  ControllerParams controller;
  FallbackParams fallback;
  WorldConfig world;
  Intrinsics camera;
  /// Resolution scale applied to `camera` (0.25 gives the 160x120 fast mode).
  double camera_scale = 1.0;
  CameraMount mount;
  EpisodeConfig episode;
  int episodes = 1;

  Intrinsics intrinsics() const { return camera.scaled(camera_scale); }
  SimSetup sim_setup() const;
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Throws io::ParseError
/// (UnknownKey, TypeMismatch, MalformedRecord, InvalidValue) with the line
/// number.
Config parse_config(std::string_view text);

/// Writes every key; parse_config(write_config(c)) reproduces c.
std::string write_config(const Config& config);

Config load_config(const std::filesystem::path& path);

/// Known keys in output order.
std::vector<std::string> config_keys();

}  // namespace rowpilot
