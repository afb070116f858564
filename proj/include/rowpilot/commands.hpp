#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rowpilot/config.hpp"
#include "rowpilot/fallback.hpp"
#include "rowpilot/sim.hpp"

namespace rowpilot {

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitEpisodeFailure = 1, kExitUsage = 2 };

struct RunOptions {
  Config config;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 42;
  std::optional<int> episodes;
  bool quiet = false;

  int episode_count() const { return episodes.value_or(config.episodes); }
  /// Setup for episode `index`; its seed is seed + index.
  SimSetup setup_for(int index) const;
};

/// Runs the episodes, writes episode_NNN.csv logs and summary.txt.
/// Stopping in front of an obstacle counts as success.
int cmd_run_sim(const RunOptions& opts, std::ostream& err, bool dump_frames = false,
                bool timing = false);

inline constexpr std::string_view kFramesHeader = "frame,detected,x_w,d,v,omega,source";

/// Replays .pgm frames in lexicographic filename order through the arbiter
/// without a classifier. Writes frames.csv.
int cmd_process_frames(const std::filesystem::path& frames_dir, const RunOptions& opts,
                       std::ostream& err);
std::string process_frames_csv(const std::vector<std::filesystem::path>& frames, const Config& config);

struct CalibrationPoint {
  double t_distance = 0.0;
  double t_area = 0.0;
  double completion_rate = 0.0;
  double false_window_rate = 0.0;
  double fallback_fraction = 0.0;
};

/// True when the step selected a window that misses the projected row end.
bool is_false_window(const StepRecord& step);

std::vector<CalibrationPoint> calibrate(const RunOptions& opts, const std::vector<double>& t_distances,
                                        const std::vector<double>& t_areas);
int cmd_calibrate(const RunOptions& opts, const std::vector<double>& t_distances,
                  const std::vector<double>& t_areas, std::ostream& err);

/// d, v, omega sampled uniformly over [-w/2, w/2].
std::string curves_csv(const ControllerParams& params, int samples);
int cmd_curves(const RunOptions& opts, int samples, std::ostream& err);

struct HarvestedSample {
  HarvestResult result;
  std::size_t step = 0;
  std::optional<ViewClass> oracle;
};

/// Feeds an episode's recorded RGB frames through six-frame harvest windows.
std::vector<HarvestedSample> harvest_log(const EpisodeLog& log, const FallbackParams& params);

/// Runs episodes with RGB recording, writes samples/*.ppm and manifest.csv.
int cmd_harvest(const RunOptions& opts, std::ostream& err);

}  // namespace rowpilot
