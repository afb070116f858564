#include "rowpilot/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rowpilot/io.hpp"

namespace rowpilot {

namespace fs = std::filesystem;

namespace {

std::string indexed(const char* prefix, int index, const char* suffix, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*d%s", prefix, digits, index, suffix);
  return buf;
}

bool episode_ok(const EpisodeLog& log) {
  return log.outcome == EpisodeOutcome::Completed || log.outcome == EpisodeOutcome::Stopped;
}

}  // namespace

SimSetup RunOptions::setup_for(int index) const {
  SimSetup s = config.sim_setup();
  s.episode.seed = seed + std::uint64_t(index);
  return s;
}

int cmd_run_sim(const RunOptions& opts, std::ostream& err, bool dump_frames, bool timing) {
  fs::create_directories(opts.out_dir);
  const int n = opts.episode_count();
  std::string summary;
  auto put = [&summary](const std::string& key, const std::string& value) {
    summary += key + " = " + value + "\n";
  };

  int ok = 0;
  int collisions = 0;
  double fallback_sum = 0.0;
  double latency_sum = 0.0;
  std::string per_episode;
  for (int i = 0; i < n; ++i) {
    const SimSetup setup = opts.setup_for(i);
    const EpisodeLog log = run_episode(opts.config.world, setup);
    io::write_file(opts.out_dir / indexed("episode_", i, ".csv"),
                   io::write_trajectory_csv(io::trajectory_rows(log)));

    if (dump_frames) {
      // Re-render and re-corrupt exactly as the live loop did.
      const fs::path dir = opts.out_dir / indexed("frames_", i, "");
      fs::create_directories(dir);
      for (std::size_t k = 0; k < log.steps.size(); ++k) {
        const StepRecord& s = log.steps[k];
        DepthFrame frame = render_depth(opts.config.world, s.pose, setup.intrinsics, setup.mount);
        if (const auto c = corruption_for_step(setup.episode, int(k))) frame = corrupt(frame, *c);
        io::write_file(dir / indexed("frame_", int(k), ".pgm", 5), io::write_depth_pgm(frame));
      }
    }

    // An episode can abort before its first step is logged.
    EpisodeMetrics m;
    if (log.steps.empty())
      m.final_obstacle_clearance =
          obstacle_clearance(opts.config.world, log.final_pose, setup.episode.robot_radius);
    else
      m = metrics(log, opts.config.world, setup.episode.robot_radius);
    if (episode_ok(log)) ++ok;
    if (m.collision) ++collisions;
    fallback_sum += m.fallback_fraction;
    latency_sum += m.mean_latency_ms;

    const std::string p = indexed("episode.", i, ".");
    per_episode += p + "seed = " + std::to_string(setup.episode.seed) + "\n";
    per_episode += p + "outcome = " + std::string(to_string(log.outcome)) + "\n";
    per_episode += p + "steps = " + std::to_string(m.steps) + "\n";
    per_episode += p + "mean_abs_y = " + io::format_double(m.mean_abs_y) + "\n";
    per_episode += p + "max_abs_y = " + io::format_double(m.max_abs_y) + "\n";
    per_episode += p + "fallback_fraction = " + io::format_double(m.fallback_fraction) + "\n";
    per_episode += p + "final_obstacle_clearance = " + io::format_double(m.final_obstacle_clearance) + "\n";
    if (timing) per_episode += p + "mean_latency_ms = " + io::format_double(m.mean_latency_ms) + "\n";
    if (!opts.quiet)
      err << "episode " << i << ": " << to_string(log.outcome) << ", mean |y| " << m.mean_abs_y
          << " m, fallback " << m.fallback_fraction << "\n";
  }

  put("episodes", std::to_string(n));
  put("successes", std::to_string(ok));
  put("collisions", std::to_string(collisions));
  put("mean_fallback_fraction", io::format_double(fallback_sum / n));
  if (timing) put("mean_latency_ms", io::format_double(latency_sum / n));
  io::write_file(opts.out_dir / "summary.txt", summary + per_episode);
  return ok == n ? kExitOk : kExitEpisodeFailure;
}

std::string process_frames_csv(const std::vector<fs::path>& frames, const Config& config) {
  std::string out(kFramesHeader);
  out += '\n';
  ArbiterState state;
  for (const fs::path& path : frames) {
    const std::string name = path.filename().string();
    DepthFrame frame;
    try {
      frame = io::read_depth_pgm(io::read_file(path));
    } catch (const std::exception&) {
      out += name + ",error,nan,nan,nan,nan,none\n";
      continue;
    }
    ControllerParams controller = config.controller;
    controller.frame_width = int(frame.cols());
    try {
      const ArbiterResult r =
          arbiter_step(frame, std::nullopt, state, controller, config.pipeline, config.fallback);
      state = r.state;
      const double x_w = r.detection ? r.detection->center_x : std::nan("");
      const double d = r.detection ? lateral_offset(*r.detection, int(frame.cols())) : std::nan("");
      out += name + "," + (r.detection ? "1" : "0") + "," + io::format_double(x_w) + "," +
             io::format_double(d) + "," + io::format_double(r.command.linear) + "," +
             io::format_double(r.command.angular) + "," + std::string(to_string(r.command.source)) + "\n";
    } catch (const ClassifierUnavailable&) {
      out += name + ",0,nan,nan,0,0,none\n";
    }
  }
  return out;
}

int cmd_process_frames(const fs::path& frames_dir, const RunOptions& opts, std::ostream& err) {
  std::vector<fs::path> frames;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(frames_dir, ec))
    if (entry.path().extension() == ".pgm") frames.push_back(entry.path());
  if (ec) {
    err << "cannot read directory " << frames_dir << ": " << ec.message() << "\n";
    return kExitUsage;
  }
  if (frames.empty()) {
    err << "no .pgm frames in " << frames_dir << "\n";
    return kExitUsage;
  }
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  fs::create_directories(opts.out_dir);
  io::write_file(opts.out_dir / "frames.csv", process_frames_csv(frames, opts.config));
  if (!opts.quiet) err << "processed " << frames.size() << " frames\n";
  return kExitOk;
}

bool is_false_window(const StepRecord& step) {
  if (!step.detection) return false;
  if (!step.true_column) return true;
  const ComponentBox& b = step.detection->window;
  return *step.true_column < b.x_min - 0.5 || *step.true_column > b.x_max + 0.5;
}

std::vector<CalibrationPoint> calibrate(const RunOptions& opts, const std::vector<double>& t_distances,
                                        const std::vector<double>& t_areas) {
  std::vector<CalibrationPoint> points;
  const int n = opts.episode_count();
  for (const double td : t_distances) {
    for (const double ta : t_areas) {
      RunOptions run = opts;
      run.config.pipeline.t_distance = td;
      run.config.pipeline.t_area = ta;
      run.config.pipeline.validate();
      CalibrationPoint p{td, ta, 0.0, 0.0, 0.0};
      long steps = 0;
      long false_windows = 0;
      for (int i = 0; i < n; ++i) {
        const SimSetup setup = run.setup_for(i);
        const EpisodeLog log = run_episode(run.config.world, setup);
        if (episode_ok(log)) p.completion_rate += 1.0;
        for (const StepRecord& s : log.steps) {
          ++steps;
          if (is_false_window(s)) ++false_windows;
          if (s.command.source == CommandSource::Fallback) p.fallback_fraction += 1.0;
        }
      }
      p.completion_rate /= n;
      p.false_window_rate = steps ? double(false_windows) / steps : 0.0;
      p.fallback_fraction = steps ? p.fallback_fraction / steps : 0.0;
      points.push_back(p);
    }
  }
  return points;
}

int cmd_calibrate(const RunOptions& opts, const std::vector<double>& t_distances,
                  const std::vector<double>& t_areas, std::ostream& err) {
  if (t_distances.empty() || t_areas.empty()) {
    err << "calibrate needs at least one t_distance and one t_area value\n";
    return kExitUsage;
  }
  std::vector<CalibrationPoint> points;
  try {
    points = calibrate(opts, t_distances, t_areas);
  } catch (const std::invalid_argument& e) {
    err << "invalid sweep: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string out = "t_distance,t_area,completion_rate,false_window_rate,fallback_fraction\n";
  for (const CalibrationPoint& p : points)
    out += io::format_double(p.t_distance) + "," + io::format_double(p.t_area) + "," +
           io::format_double(p.completion_rate) + "," + io::format_double(p.false_window_rate) + "," +
           io::format_double(p.fallback_fraction) + "\n";
  fs::create_directories(opts.out_dir);
  io::write_file(opts.out_dir / "calibration.csv", out);
  if (!opts.quiet) err << "wrote " << points.size() << " calibration points\n";
  return kExitOk;
}

std::string curves_csv(const ControllerParams& params, int samples) {
  std::string out = "d,v,omega\n";
  const double half = 0.5 * params.frame_width;
  for (int i = 0; i < samples; ++i) {
    const double d = i + 1 == samples ? half : -half + 2.0 * half * i / (samples - 1);
    out += io::format_double(d) + "," + io::format_double(linear_velocity(d, params)) + "," +
           io::format_double(angular_velocity(d, params)) + "\n";
  }
  return out;
}

int cmd_curves(const RunOptions& opts, int samples, std::ostream& err) {
  if (samples < 2) {
    err << "curves needs at least 2 samples\n";
    return kExitUsage;
  }
  fs::create_directories(opts.out_dir);
  io::write_file(opts.out_dir / "curves.csv", curves_csv(opts.config.controller, samples));
  return kExitOk;
}

std::vector<HarvestedSample> harvest_log(const EpisodeLog& log, const FallbackParams& params) {
  std::vector<HarvestedSample> out;
  LabelHarvester harvester(params);
  const std::size_t n = std::min(log.steps.size(), log.rgb.size());
  for (std::size_t k = 0; k < n; ++k) {
    const StepRecord& s = log.steps[k];
    auto result = harvester.push({log.rgb[k], s.detection, log.frame_width, s.t});
    if (!result) continue;
    const std::size_t step = k + 1 - LabelHarvester::kWindow + result->index_in_window;
    out.push_back({std::move(*result), step, log.steps[step].oracle_view});
  }
  return out;
}

int cmd_harvest(const RunOptions& opts, std::ostream& err) {
  const fs::path samples_dir = opts.out_dir / "samples";
  fs::create_directories(samples_dir);
  std::vector<LabeledSample> manifest;
  for (int i = 0; i < opts.episode_count(); ++i) {
    SimSetup setup = opts.setup_for(i);
    setup.episode.record_rgb = true;
    const EpisodeLog log = run_episode(opts.config.world, setup);
    for (HarvestedSample& h : harvest_log(log, setup.fallback)) {
      const std::string name = indexed("ep", i, "_", 3) + indexed("", int(h.step), ".ppm", 6);
      io::write_file(samples_dir / name, io::write_ppm(h.result.frame));
      h.result.sample.path = "samples/" + name;
      manifest.push_back(h.result.sample);
    }
  }
  io::write_file(opts.out_dir / "manifest.csv", io::write_manifest_csv(manifest));
  if (!opts.quiet) err << "harvested " << manifest.size() << " samples\n";
  return kExitOk;
}

}  // namespace rowpilot
