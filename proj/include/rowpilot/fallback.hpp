#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rowpilot/control.hpp"
#include "rowpilot/depth.hpp"
#include "rowpilot/world.hpp"

namespace rowpilot {

/// 8-bit interleaved RGB, row-major.
struct RgbFrame {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  RgbFrame() = default;
  RgbFrame(int h, int w) : height(h), width(w), data(std::size_t(h) * w * 3, 0) {}

  std::uint8_t& at(int y, int x, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }
  bool operator==(const RgbFrame&) const = default;
};

using Channel = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Resized, [0, 1]-scaled network input, one plane per channel.
struct ClassifierInput {
  std::array<Channel, 3> channels;

  Eigen::Index height() const { return channels[0].rows(); }
  Eigen::Index width() const { return channels[0].cols(); }
};

struct FallbackParams {
  double turn_ang_vel = 0.6;
  double turn_lin_vel = 0.2;
  double center_lin_vel = 0.5;
  /// |d| at or below which a harvested sample is Center, in pixels of a
  /// reference_width-wide frame.
  double center_band = 100.0;
  double reference_width = 640.0;
  double oracle_center_half_angle = 15.0 * std::numbers::pi / 180.0;
  int input_height = 224;
  int input_width = 224;

  double center_band_for(double width) const { return center_band * width / reference_width; }
  void validate() const;
};

struct Classification {
  ViewClass view = ViewClass::Center;
  double confidence = 0.0;
};

class ModelUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backup heading classifier. Implementations must be deterministic and
/// callable concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Classification classify(const ClassifierInput& input) const = 0;
};

ClassifierInput preprocess_frame(const RgbFrame& frame, int out_height, int out_width);

class NoFarField : public std::runtime_error {
 public:
  NoFarField() : std::runtime_error("mask has no far-field pixel") {}
};

/// Classifies by the column centroid of the far-field bits. A centroid
/// right of center means the camera points left of the row end.
Classification heuristic_classify(const BinaryMask& mask, const FallbackParams& params);

/// Heuristic classifier over RGB input: bright sky pixels form the mask.
class HeuristicClassifier : public Classifier {
 public:
  explicit HeuristicClassifier(FallbackParams params, float sky_threshold = 0.75f)
      : params_(params), sky_threshold_(sky_threshold) {}
  Classification classify(const ClassifierInput& input) const override;
  BinaryMask sky_mask(const ClassifierInput& input) const;

 private:
  FallbackParams params_;
  float sky_threshold_;
};

ControlCommand discrete_command(ViewClass view, const FallbackParams& params);

/// Variance of the 4-neighbour Laplacian of the channel-mean gray image,
/// over interior pixels.
double sharpness_score(const RgbFrame& frame);

ViewClass label_from_offset(double d, double frame_width, const FallbackParams& params);

struct LabeledSample {
  std::string path;
  ViewClass label = ViewClass::Center;
  double offset_px = 0.0;
  double sharpness = 0.0;
  double timestamp = 0.0;
};

struct HarvestCandidate {
  RgbFrame frame;
  std::optional<Detection> detection;
  int frame_width = 0;
  double timestamp = 0.0;
};

/// Selected sample of a full window. `frame` is the chosen image; the
/// caller decides where to persist it and fills `sample.path`.
struct HarvestResult {
  LabeledSample sample;
  RgbFrame frame;
  std::size_t index_in_window = 0;
};

class OutsideCorridor : public std::runtime_error {
 public:
  OutsideCorridor() : std::runtime_error("pose is outside the corridor") {}
};

/// Ground-truth heading class from the robot's heading error to the
/// corridor axis (positive = pointing left of the axis).
ViewClass oracle_classify(const Pose& pose, const WorldConfig& world, const FallbackParams& params);

/// Picks the sharpest frame of a window and labels it from its depth offset.
/// Returns nothing when that frame has no depth detection.
std::optional<HarvestResult> label_harvest(const std::vector<HarvestCandidate>& window,
                                           const FallbackParams& params);

/// Buffers frames and emits one labeled sample per full window.
class LabelHarvester {
 public:
  static constexpr std::size_t kWindow = 6;

  explicit LabelHarvester(FallbackParams params) : params_(params) {}
  std::optional<HarvestResult> push(HarvestCandidate candidate);

 private:
  FallbackParams params_;
  std::vector<HarvestCandidate> buffer_;
};

}  // namespace rowpilot
