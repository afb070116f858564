#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rowpilot/depth.hpp"
#include "rowpilot/fallback.hpp"
#include "rowpilot/sim.hpp"

namespace rowpilot::io {

using Bytes = std::vector<std::uint8_t>;

enum class ErrorKind {
  MalformedHeader,
  WrongMaxval,
  TruncatedData,
  MalformedRecord,
  UnknownKey,
  TypeMismatch,
  InvalidValue,
};

std::string_view to_string(ErrorKind kind);

/// Structured parse failure. `position` is a byte offset for binary images
/// and a 1-based line number for text formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(ErrorKind kind, std::size_t position, const std::string& detail);

  ErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  ErrorKind kind_;
  std::size_t position_;
};

DepthFrame read_depth_pgm(std::span<const std::uint8_t> bytes);
Bytes write_depth_pgm(const DepthFrame& frame);

RgbFrame read_ppm(std::span<const std::uint8_t> bytes);
Bytes write_ppm(const RgbFrame& frame);

/// One row of an episode trajectory log.
struct TrajectoryRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
  CommandSource source = CommandSource::Depth;
  /// NaN when no window was detected.
  double d = 0.0;
};

inline constexpr std::string_view kTrajectoryHeader = "t,x,y,theta,v,omega,source,d";
inline constexpr std::string_view kManifestHeader = "path,label,offset_px,sharpness,timestamp";

std::vector<TrajectoryRow> trajectory_rows(const EpisodeLog& log);
std::string write_trajectory_csv(const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory_csv(std::string_view text);

std::string write_manifest_csv(const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_manifest_csv(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace rowpilot::io
