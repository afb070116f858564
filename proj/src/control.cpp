#include "rowpilot/control.hpp"

#include "rowpilot/fallback.hpp"

namespace rowpilot {

std::string_view to_string(ViewClass view) {
  switch (view) {
    case ViewClass::Left: return "left";
    case ViewClass::Center: return "center";
    case ViewClass::Right: return "right";
  }
  return "?";
}

std::string_view to_string(CommandSource source) {
  switch (source) {
    case CommandSource::Depth: return "depth";
    case CommandSource::Fallback: return "fallback";
    case CommandSource::EmergencyStop: return "estop";
  }
  return "?";
}

void ControllerParams::validate() const {
  if (!(max_lin_vel > 0.0)) throw std::invalid_argument("controller.max_lin_vel must be > 0");
  if (!(max_ang_vel > 0.0)) throw std::invalid_argument("controller.max_ang_vel must be > 0");
  if (frame_width < 2) throw std::invalid_argument("controller.frame_width must be >= 2");
  if (fallback_engage_count < 1 || fallback_release_count < 1)
    throw std::invalid_argument("controller fallback counts must be >= 1");
}

ControlCommand depth_command(const Detection& det, const ControllerParams& params) {
  const double d = lateral_offset(det, params.frame_width);
  return {linear_velocity(d, params), angular_velocity(d, params), CommandSource::Depth};
}

ArbiterResult arbiter_step(const DepthFrame& frame, std::optional<ViewClass> view,
                           const ArbiterState& state, const ControllerParams& params,
                           const DepthPipelineParams& pipeline, const FallbackParams& fallback) {
  ArbiterResult result;
  result.state = state;
  ArbiterState& next = result.state;

  if (check_obstacle(frame, pipeline)) {
    next.consecutive_depth_failures = 0;
    next.consecutive_depth_successes = 0;
    result.command = ControlCommand::stop();
    result.obstacle = true;
    return result;
  }

  auto fallback_command = [&] {
    if (!view) throw ClassifierUnavailable();
    return discrete_command(*view, fallback);
  };

  ControllerParams local = params;
  local.frame_width = int(frame.cols());
  result.detection = detect_row_end(frame, pipeline);

  if (result.detection) {
    next.consecutive_depth_failures = 0;
    ++next.consecutive_depth_successes;
    const ControlCommand depth = depth_command(*result.detection, local);
    if (next.mode == ArbiterMode::Fallback &&
        next.consecutive_depth_successes < params.fallback_release_count) {
      result.command = fallback_command();
      return result;
    }
    next.mode = ArbiterMode::Depth;
    next.last_depth_command = depth;
    result.command = depth;
    return result;
  }

  next.consecutive_depth_successes = 0;
  ++next.consecutive_depth_failures;
  if (next.mode == ArbiterMode::Depth &&
      next.consecutive_depth_failures < params.fallback_engage_count &&
      next.last_depth_command) {
    result.command = *next.last_depth_command;
    return result;
  }
  result.command = fallback_command();
  if (next.consecutive_depth_failures >= params.fallback_engage_count) {
    next.mode = ArbiterMode::Fallback;
    next.last_depth_command.reset();
  }
  return result;
}

}  // namespace rowpilot
