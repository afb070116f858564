#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rowpilot/control.hpp"
#include "rowpilot/depth.hpp"
#include "rowpilot/fallback.hpp"
#include "rowpilot/world.hpp"

namespace rowpilot {

/// Pinhole intrinsics. Defaults are the depth stream at 640x480.
struct Intrinsics {
  int width = 640;
  int height = 480;
  double fx = 387.342498779297;
  double fy = 387.342498779297;
  double ppx = 321.910675048828;
  double ppy = 236.759078979492;
  double max_range = 8000.0;

  /// Same field of view at a proportionally scaled resolution.
  Intrinsics scaled(double factor) const;
  void validate() const;
};

struct CameraMount {
  double height = 0.4;
  /// Distance of the optical center ahead of the robot center.
  double forward_offset = 0.2;
};

/// Glare and dropout model for depth frames.
struct CorruptionParams {
  double dropout_rate = 0.0;
  double saturation_rate = 0.0;
  int blob_count = 0;
  double blob_radius = 0.0;
  /// Depth written into saturated pixels.
  std::uint16_t saturation_value = 600;
  std::uint64_t seed = 0;

  bool active() const { return dropout_rate > 0.0 || saturation_rate > 0.0 || blob_count > 0; }
  void validate() const;
};

enum class SurfaceKind : std::uint8_t { None, Wall, Ground, Obstacle };

struct RenderedView {
  DepthFrame depth;
  RgbFrame rgb;
};

RenderedView render_view(const WorldConfig& world, const Pose& pose, const Intrinsics& intr,
                         const CameraMount& mount, bool with_rgb);

DepthFrame render_depth(const WorldConfig& world, const Pose& pose, const Intrinsics& intr,
                        const CameraMount& mount = {});

/// Horizontal box blur of `radius` pixels on each side.
RgbFrame motion_blur(const RgbFrame& frame, int radius);

/// Image column of the corridor end on the centerline, if it is in front of
/// the camera.
std::optional<double> row_end_column(const WorldConfig& world, const Pose& pose,
                                     const Intrinsics& intr, const CameraMount& mount = {});

DepthFrame corrupt(const DepthFrame& frame, const CorruptionParams& params);

Pose step_kinematics(const Pose& pose, const ControlCommand& cmd, double dt);

enum class ClassifierChoice { None, Oracle, Heuristic };

struct EpisodeConfig {
  double dt = 1.0 / 30.0;
  int max_steps = 3000;
  Pose start;
  /// Uniform start perturbation half-widths drawn from the episode seed.
  double jitter_y = 0.0;
  double jitter_theta = 0.0;
  CorruptionParams corruption;
  /// Corruption applies for t in [corruption_start, corruption_start + corruption_duration).
  double corruption_start = 0.0;
  double corruption_duration = std::numeric_limits<double>::infinity();
  ClassifierChoice classifier = ClassifierChoice::None;
  double robot_radius = 0.25;
  int stop_hold_steps = 30;
  std::uint64_t seed = 0;
  /// Keep rendered RGB frames in the log (for harvesting).
  bool record_rgb = false;

  void validate() const;
};

/// Corruption applied to the frame of step `step`, if any. Each step gets
/// its own seed derived from the episode and corruption seeds.
std::optional<CorruptionParams> corruption_for_step(const EpisodeConfig& ep, int step);

struct StepRecord {
  double t = 0.0;
  Pose pose;
  ControlCommand command;
  /// Lateral offset d in pixels; NaN without a detection.
  double d = std::numeric_limits<double>::quiet_NaN();
  std::optional<Detection> detection;
  bool obstacle = false;
  std::optional<double> true_column;
  std::optional<ViewClass> oracle_view;
  double latency_ms = 0.0;
};

enum class EpisodeOutcome { Completed, Collision, Stopped, ClassifierFailure, Timeout };

std::string_view to_string(EpisodeOutcome outcome);

struct EpisodeLog {
  std::vector<StepRecord> steps;
  std::vector<RgbFrame> rgb;
  Pose final_pose;
  EpisodeOutcome outcome = EpisodeOutcome::Timeout;
  int frame_width = 0;
};

struct EpisodeMetrics {
  bool completed = false;
  bool collision = false;
  bool stopped = false;
  int steps = 0;
  double mean_abs_y = 0.0;
  double max_abs_y = 0.0;
  double fallback_fraction = 0.0;
  double mean_latency_ms = 0.0;
  double final_obstacle_clearance = std::numeric_limits<double>::infinity();
};

/// Everything run_episode needs besides the world.
struct SimSetup {
  ControllerParams controller;
  DepthPipelineParams pipeline;
  FallbackParams fallback;
  Intrinsics intrinsics;
  CameraMount mount;
  EpisodeConfig episode;
};

/// Free space between the robot disk and the nearest obstacle surface.
double obstacle_clearance(const WorldConfig& world, const Pose& pose, double robot_radius);
bool in_collision(const WorldConfig& world, const Pose& pose, double robot_radius);

EpisodeLog run_episode(const WorldConfig& world, const SimSetup& setup);

class EmptyLog : public std::invalid_argument {
 public:
  EmptyLog() : std::invalid_argument("episode log has no steps") {}
};

EpisodeMetrics metrics(const EpisodeLog& log, const WorldConfig& world, double robot_radius);

}  // namespace rowpilot
