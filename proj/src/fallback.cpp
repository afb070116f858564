#include "rowpilot/fallback.hpp"

#include <algorithm>
#include <cmath>

namespace rowpilot {

void FallbackParams::validate() const {
  if (!(turn_ang_vel > 0.0 && turn_lin_vel > 0.0 && center_lin_vel > 0.0))
    throw std::invalid_argument("fallback velocities must be > 0");
  if (turn_lin_vel > center_lin_vel)
    throw std::invalid_argument("fallback.turn_lin_vel must not exceed fallback.center_lin_vel");
  if (!(center_band > 0.0 && reference_width > 0.0 && oracle_center_half_angle > 0.0))
    throw std::invalid_argument("fallback band parameters must be > 0");
  if (input_height < 1 || input_width < 1)
    throw std::invalid_argument("fallback input size must be >= 1");
}

ClassifierInput preprocess_frame(const RgbFrame& frame, int out_height, int out_width) {
  if (frame.height < 1 || frame.width < 1 || out_height < 1 || out_width < 1)
    throw std::invalid_argument("preprocess_frame: empty frame or output size");

  // Half-pixel-center bilinear sampling, clamped at the borders.
  struct Tap {
    int lo, hi;
    float w;
  };
  auto taps = [](int out, int in) {
    std::vector<Tap> t(out);
    const double scale = double(in) / out;
    for (int i = 0; i < out; ++i) {
      const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, double(in - 1));
      const int lo = int(std::floor(src));
      t[i] = {lo, std::min(lo + 1, in - 1), float(src - lo)};
    }
    return t;
  };
  const auto ty = taps(out_height, frame.height);
  const auto tx = taps(out_width, frame.width);

  ClassifierInput input;
  for (int c = 0; c < 3; ++c) {
    Channel& ch = input.channels[c];
    ch.resize(out_height, out_width);
    for (int y = 0; y < out_height; ++y) {
      const Tap& vy = ty[y];
      for (int x = 0; x < out_width; ++x) {
        const Tap& vx = tx[x];
        const float top = (1 - vx.w) * frame.at(vy.lo, vx.lo, c) + vx.w * frame.at(vy.lo, vx.hi, c);
        const float bottom = (1 - vx.w) * frame.at(vy.hi, vx.lo, c) + vx.w * frame.at(vy.hi, vx.hi, c);
        ch(y, x) = ((1 - vy.w) * top + vy.w * bottom) / 255.0f;
      }
    }
  }
  return input;
}

Classification heuristic_classify(const BinaryMask& mask, const FallbackParams& params) {
  const Eigen::Index count = (mask != 0).count();
  if (mask.size() == 0 || count == 0) throw NoFarField();

  double column_sum = 0.0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y)
    for (Eigen::Index x = 0; x < mask.cols(); ++x)
      if (mask(y, x)) column_sum += double(x);
  const double width = double(mask.cols());
  const double offset = column_sum / double(count) - 0.5 * (width - 1.0);
  const double strength = std::clamp(std::abs(offset) / (0.5 * width), 0.0, 1.0);

  if (std::abs(offset) <= params.center_band_for(width)) return {ViewClass::Center, 1.0 - strength};
  return {offset > 0 ? ViewClass::Left : ViewClass::Right, strength};
}

BinaryMask HeuristicClassifier::sky_mask(const ClassifierInput& input) const {
  const Channel mean = (input.channels[0] + input.channels[1] + input.channels[2]) / 3.0f;
  return (mean > sky_threshold_).cast<std::uint8_t>();
}

Classification HeuristicClassifier::classify(const ClassifierInput& input) const {
  if (input.height() != params_.input_height || input.width() != params_.input_width)
    throw ModelUnavailable("heuristic classifier: unexpected input size");
  try {
    return heuristic_classify(sky_mask(input), params_);
  } catch (const NoFarField&) {
    throw ModelUnavailable("heuristic classifier: no sky visible");
  }
}

ControlCommand discrete_command(ViewClass view, const FallbackParams& params) {
  switch (view) {
    case ViewClass::Left:
      return {params.turn_lin_vel, -params.turn_ang_vel, CommandSource::Fallback};
    case ViewClass::Right:
      return {params.turn_lin_vel, params.turn_ang_vel, CommandSource::Fallback};
    case ViewClass::Center:
      break;
  }
  return {params.center_lin_vel, 0.0, CommandSource::Fallback};
}

double sharpness_score(const RgbFrame& frame) {
  const int h = frame.height;
  const int w = frame.width;
  if (h < 3 || w < 3) throw std::invalid_argument("sharpness_score: frame smaller than 3x3");

  using Gray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Gray gray(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray(y, x) = (double(frame.at(y, x, 0)) + frame.at(y, x, 1) + frame.at(y, x, 2)) / 3.0;

  // Mirror without repeating the edge pixel: -1 -> 1, n -> n - 2.
  auto reflect = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  Gray lap(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      lap(y, x) = gray(reflect(y - 1, h), x) + gray(reflect(y + 1, h), x) +
                  gray(y, reflect(x - 1, w)) + gray(y, reflect(x + 1, w)) - 4.0 * gray(y, x);
  const double mean = lap.mean();
  return std::max(0.0, (lap - mean).square().mean());
}

ViewClass label_from_offset(double d, double frame_width, const FallbackParams& params) {
  if (std::abs(d) <= params.center_band_for(frame_width)) return ViewClass::Center;
  return d > 0 ? ViewClass::Left : ViewClass::Right;
}

ViewClass oracle_classify(const Pose& pose, const WorldConfig& world, const FallbackParams& params) {
  if (!(pose.x >= 0.0 && pose.x <= world.row_length && std::abs(pose.y) < world.half_width()))
    throw OutsideCorridor();
  const double psi = wrap_angle(pose.theta);
  if (std::abs(psi) <= params.oracle_center_half_angle) return ViewClass::Center;
  return psi > 0 ? ViewClass::Left : ViewClass::Right;
}

std::optional<HarvestResult> label_harvest(const std::vector<HarvestCandidate>& window,
                                           const FallbackParams& params) {
  if (window.empty()) return std::nullopt;
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const double s = sharpness_score(window[i].frame);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  const HarvestCandidate& chosen = window[best];
  if (!chosen.detection) return std::nullopt;

  HarvestResult result;
  result.sample.offset_px = lateral_offset(*chosen.detection, chosen.frame_width);
  result.sample.label = label_from_offset(result.sample.offset_px, chosen.frame_width, params);
  result.sample.sharpness = best_score;
  result.sample.timestamp = chosen.timestamp;
  result.frame = chosen.frame;
  result.index_in_window = best;
  return result;
}

std::optional<HarvestResult> LabelHarvester::push(HarvestCandidate candidate) {
  buffer_.push_back(std::move(candidate));
  if (buffer_.size() < kWindow) return std::nullopt;
  auto result = label_harvest(buffer_, params_);
  buffer_.clear();
  return result;
}

}  // namespace rowpilot
