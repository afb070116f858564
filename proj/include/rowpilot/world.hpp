#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace rowpilot {

enum class Side { Left, Right };

/// Gap in a side wall over [start, start + length] along the row, from the
/// ground up to `height`.
struct Hole {
  Side side = Side::Left;
  double start = 0.0;
  double length = 0.0;
  double height = 0.0;
  bool operator==(const Hole&) const = default;
};

/// Upright cylinder standing on the ground.
struct Obstacle {
  double x = 0.0;
  double lateral = 0.0;
  double radius = 0.2;
  double height = 1.0;
  bool operator==(const Obstacle&) const = default;
};

/// A single corridor along +x from x = 0 to row_length, walls at
/// y = +-row_spacing / 2 (left wall at positive y).
struct WorldConfig {
  double row_length = 30.0;
  double row_spacing = 2.5;
  double wall_height = 2.0;
  std::vector<Hole> holes;
  std::vector<Obstacle> obstacles;
  bool ground_plane = true;
  /// Optional frontal wall spanning the corridor at this x.
  std::optional<double> end_wall_x;

  double half_width() const { return 0.5 * row_spacing; }
  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

/// Planar robot state; theta is in (-pi, pi], 0 along the corridor axis.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace rowpilot
