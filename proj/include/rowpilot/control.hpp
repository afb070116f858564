#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "rowpilot/depth.hpp"

namespace rowpilot {

enum class ViewClass { Left, Center, Right };
enum class CommandSource { Depth, Fallback, EmergencyStop };

std::string_view to_string(ViewClass view);
std::string_view to_string(CommandSource source);

struct ControllerParams {
  double max_lin_vel = 1.0;
  double max_ang_vel = 1.0;
  int frame_width = 640;
  int fallback_engage_count = 3;
  int fallback_release_count = 5;

  void validate() const;
};

/// Velocity command. Positive angular is counterclockwise (turn left).
struct ControlCommand {
  double linear = 0.0;
  double angular = 0.0;
  CommandSource source = CommandSource::Depth;

  static ControlCommand stop() { return {0.0, 0.0, CommandSource::EmergencyStop}; }
  bool operator==(const ControlCommand&) const = default;
};

/// Signed pixel offset of the window center from the frame center.
template <typename Scalar = double>
Scalar lateral_offset(const Detection& det, int frame_width) {
  return Scalar(det.center_x) - Scalar(frame_width) / Scalar(2);
}

/// Squared offset over squared half width, in [0, 1] on the valid domain.
template <typename Scalar>
Scalar offset_ratio_sq(Scalar d, int frame_width) {
  const Scalar half = Scalar(frame_width) / Scalar(2);
  return (d * d) / (half * half);
}

/// Parabolic steering law: a window right of center (d >= 0) turns clockwise.
template <typename Scalar>
Scalar angular_velocity(Scalar d, const ControllerParams& params) {
  const Scalar magnitude = Scalar(params.max_ang_vel) * offset_ratio_sq(d, params.frame_width);
  return d >= Scalar(0) ? -magnitude : magnitude;
}

/// Parabolic speed law: full speed when centered, zero at the frame edge.
template <typename Scalar>
Scalar linear_velocity(Scalar d, const ControllerParams& params) {
  return Scalar(params.max_lin_vel) * (Scalar(1) - offset_ratio_sq(d, params.frame_width));
}

ControlCommand depth_command(const Detection& det, const ControllerParams& params);

struct FallbackParams;

enum class ArbiterMode { Depth, Fallback };

struct ArbiterState {
  int consecutive_depth_failures = 0;
  int consecutive_depth_successes = 0;
  ArbiterMode mode = ArbiterMode::Depth;
  /// Re-issued while depth failures are below the engage count.
  std::optional<ControlCommand> last_depth_command;
};

/// Depth failed and there is no classifier prediction to fall back on.
class ClassifierUnavailable : public std::runtime_error {
 public:
  ClassifierUnavailable()
      : std::runtime_error("depth detection failed and no classifier prediction is available") {}
};

struct ArbiterResult {
  ControlCommand command;
  ArbiterState state;
  std::optional<Detection> detection;
  bool obstacle = false;
};

/// One control cycle: emergency stop, then depth control, then the
/// classifier fallback, with counted hysteresis between the last two.
ArbiterResult arbiter_step(const DepthFrame& frame, std::optional<ViewClass> view,
                           const ArbiterState& state, const ControllerParams& params,
                           const DepthPipelineParams& pipeline, const FallbackParams& fallback);

}  // namespace rowpilot
