// rowpilot: corridor-following planner and simulator front end.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rowpilot/commands.hpp"
#include "rowpilot/config.hpp"
#include "rowpilot/io.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 42;
  int episodes = 0;
  bool quiet = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Config file (key = value); falls back to $ROWPILOT_CONFIG");
    app->add_option("--out", out_dir, "Output directory");
    app->add_option("--seed", seed, "Base seed; episode i uses seed + i");
    app->add_option("--episodes", episodes, "Episode count (overrides episode.count)")->check(CLI::PositiveNumber);
    app->add_flag("--quiet", quiet, "Suppress progress output");
  }

  rowpilot::RunOptions load() const {
    rowpilot::RunOptions opts;
    std::string path = config_path;
    if (path.empty())
      if (const char* env = std::getenv("ROWPILOT_CONFIG")) path = env;
    if (!path.empty()) opts.config = rowpilot::load_config(path);
    opts.out_dir = out_dir;
    opts.seed = seed;
    if (episodes > 0) opts.episodes = episodes;
    opts.quiet = quiet;
    return opts;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-map corridor following with a classifier fallback"};
  app.require_subcommand(1);

  CommonFlags run_flags, frames_flags, calib_flags, curves_flags, harvest_flags;

  auto* run = app.add_subcommand("run-sim", "Simulate closed-loop episodes");
  run_flags.attach(run);
  bool dump_frames = false;
  bool timing = false;
  run->add_flag("--dump-frames", dump_frames, "Write every depth frame as 16-bit PGM");
  run->add_flag("--timing", timing, "Include loop latency in the summary (not reproducible)");

  auto* frames = app.add_subcommand("process-frames", "Replay recorded depth frames");
  frames_flags.attach(frames);
  std::string frames_dir;
  frames->add_option("frames", frames_dir, "Directory of .pgm depth frames")->required();

  auto* calib = app.add_subcommand("calibrate", "Sweep t_distance x t_area");
  calib_flags.attach(calib);
  std::vector<double> t_distances{0.5};
  std::vector<double> t_areas{0.0};
  calib->add_option("--t-distance", t_distances, "Comma-separated t_distance values")->delimiter(',');
  calib->add_option("--t-area", t_areas, "Comma-separated t_area values (0 = 1% of frame)")->delimiter(',');

  auto* curves = app.add_subcommand("curves", "Emit the d -> (v, omega) control curves");
  curves_flags.attach(curves);
  int samples = 65;
  curves->add_option("--samples", samples, "Number of d samples over [-w/2, w/2]");

  auto* harvest = app.add_subcommand("harvest", "Collect auto-labeled RGB samples");
  harvest_flags.attach(harvest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rowpilot::kExitUsage;
  }

  try {
    if (run->parsed()) return rowpilot::cmd_run_sim(run_flags.load(), std::cerr, dump_frames, timing);
    if (frames->parsed()) return rowpilot::cmd_process_frames(frames_dir, frames_flags.load(), std::cerr);
    if (calib->parsed()) return rowpilot::cmd_calibrate(calib_flags.load(), t_distances, t_areas, std::cerr);
    if (curves->parsed()) return rowpilot::cmd_curves(curves_flags.load(), samples, std::cerr);
    if (harvest->parsed()) return rowpilot::cmd_harvest(harvest_flags.load(), std::cerr);
  } catch (const rowpilot::io::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return rowpilot::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rowpilot::kExitUsage;
  }
  return rowpilot::kExitUsage;
}
