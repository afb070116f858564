#include "rowpilot/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rowpilot {

void DepthPipelineParams::validate() const {
  if (!(t_distance > 0.0 && t_distance < 1.0))
    throw std::invalid_argument("pipeline.t_distance must lie in (0, 1)");
  if (t_area < 0.0) throw std::invalid_argument("pipeline.t_area must be >= 0 (0 = 1% of frame)");
  if (!(stop_distance > 0.0)) throw std::invalid_argument("pipeline.stop_distance must be > 0");
  if (!(stop_fraction > 0.0 && stop_fraction < 1.0))
    throw std::invalid_argument("pipeline.stop_fraction must lie in (0, 1)");
  if (!(stop_roi_fraction > 0.0 && stop_roi_fraction <= 1.0))
    throw std::invalid_argument("pipeline.stop_roi_fraction must lie in (0, 1]");
  if (min_far_depth < 0.0) throw std::invalid_argument("pipeline.min_far_depth must be >= 0");
}

std::optional<Detection> select_window(const std::vector<ComponentBox>& boxes,
                                       double t_area, int frame_width) {
  if (boxes.empty()) return std::nullopt;
  const double frame_center = 0.5 * frame_width;
  auto better = [frame_center](const ComponentBox& a, const ComponentBox& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    const double da = std::abs(a.center_x() - frame_center);
    const double db = std::abs(b.center_x() - frame_center);
    if (da != db) return da < db;
    if (a.x_min != b.x_min) return a.x_min < b.x_min;
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    if (a.x_max != b.x_max) return a.x_max < b.x_max;
    return a.y_max < b.y_max;
  };
  const ComponentBox& best = *std::min_element(boxes.begin(), boxes.end(), better);
  if (double(best.area()) < t_area) return std::nullopt;
  return Detection{best, best.center_x()};
}

std::optional<Detection> detect_row_end(const DepthFrame& frame,
                                        const DepthPipelineParams& params) {
  if (frame.size() == 0) return std::nullopt;
  const std::uint16_t peak = frame.maxCoeff();
  if (peak == 0 || double(peak) < params.min_far_depth) return std::nullopt;
  const BinaryMask mask =
      threshold_far_field(normalize_depth<float>(frame), float(params.t_distance));
  return select_window(extract_components(mask),
                       params.area_threshold(frame.rows(), frame.cols()), int(frame.cols()));
}

std::pair<int, int> obstacle_roi_columns(int width, double roi_fraction) {
  const int band = std::clamp(int(std::lround(roi_fraction * width)), 1, width);
  const int first = (width - band) / 2;
  return {first, first + band - 1};
}

bool check_obstacle(const DepthFrame& frame, const DepthPipelineParams& params) {
  if (frame.size() == 0) return true;
  const auto [first, last] = obstacle_roi_columns(int(frame.cols()), params.stop_roi_fraction);
  const auto roi = frame.middleCols(first, last - first + 1).array();
  const long valid = (roi > 0).count();
  if (valid == 0) return true;
  const long near = ((roi > 0) && (roi.template cast<double>() < params.stop_distance)).count();
  return double(near) / double(valid) > params.stop_fraction;
}

}  // namespace rowpilot
