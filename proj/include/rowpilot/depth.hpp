#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rowpilot {

/// Depth samples in millimeters, row-major, one per pixel. 0 means no return.
using DepthFrame = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Depth divided by the frame maximum, values in [0, 1].
template <typename Scalar = float>
using NormalizedDepth = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 1 = far field, 0 = near field.
using BinaryMask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::uint16_t kMaxDepthMm = 8000;

/// Inclusive pixel bounds of a connected far-field region.
struct ComponentBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  long area() const { return long(x_max - x_min + 1) * long(y_max - y_min + 1); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  bool operator==(const ComponentBox&) const = default;
};

/// The selected control window.
struct Detection {
  ComponentBox window;
  double center_x = 0.0;
};

struct DepthPipelineParams {
  double t_distance = 0.5;
  /// Minimum window box area in pixels. Non-positive means "1% of frame pixels".
  double t_area = 0.0;
  double stop_distance = 500.0;
  double stop_fraction = 0.05;
  double stop_roi_fraction = 1.0 / 3.0;
  /// Frames whose farthest valid sample is nearer than this (mm) have no
  /// far field at all, however the normalized values fall.
  double min_far_depth = 1000.0;

  double area_threshold(Eigen::Index height, Eigen::Index width) const {
    return t_area > 0.0 ? t_area : 0.01 * double(height * width);
  }
  void validate() const;
};

/// Thrown when every pixel of a frame is invalid.
class AllInvalidError : public std::runtime_error {
 public:
  AllInvalidError() : std::runtime_error("depth frame has no valid pixel") {}
};

template <typename Scalar = float>
NormalizedDepth<Scalar> normalize_depth(const DepthFrame& frame) {
  if (frame.size() == 0) throw AllInvalidError();
  const std::uint16_t peak = frame.maxCoeff();
  if (peak == 0) throw AllInvalidError();
  return frame.array().template cast<Scalar>() / Scalar(peak);
}

template <typename Derived>
BinaryMask threshold_far_field(const Eigen::ArrayBase<Derived>& normalized,
                               typename Derived::Scalar t_distance) {
  return (normalized > t_distance).template cast<std::uint8_t>();
}

/// Bounding boxes of the 8-connected components of 1-bits, in raster order
/// of each component's first pixel.
std::vector<ComponentBox> extract_components(const BinaryMask& mask);

/// Largest box if its area reaches t_area. Ties go to the box whose center
/// is closest to the frame center, then to the leftmost, then topmost.
std::optional<Detection> select_window(const std::vector<ComponentBox>& boxes,
                                       double t_area, int frame_width);

std::optional<Detection> detect_row_end(const DepthFrame& frame,
                                        const DepthPipelineParams& params);

/// Column range [first, last] of the central obstacle band.
std::pair<int, int> obstacle_roi_columns(int width, double roi_fraction);

bool check_obstacle(const DepthFrame& frame, const DepthPipelineParams& params);

}  // namespace rowpilot
