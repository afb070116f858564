#include "rowpilot/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace rowpilot {

using Eigen::Vector3d;

void WorldConfig::validate() const {
  if (!(row_spacing > 0.0)) throw std::invalid_argument("world.row_spacing must be > 0");
  if (!(row_length > 0.0)) throw std::invalid_argument("world.row_length must be > 0");
  if (!(wall_height > 0.0)) throw std::invalid_argument("world.wall_height must be > 0");
  for (const Hole& h : holes)
    if (h.start < 0.0 || h.length <= 0.0 || h.start + h.length > row_length || h.height <= 0.0)
      throw std::invalid_argument("world.hole must lie within the row");
  for (const Obstacle& o : obstacles)
    if (std::abs(o.lateral) >= half_width() || o.radius <= 0.0 || o.height <= 0.0)
      throw std::invalid_argument("world.obstacle must lie within the corridor");
}

Intrinsics Intrinsics::scaled(double factor) const {
  Intrinsics s = *this;
  s.width = int(std::lround(width * factor));
  s.height = int(std::lround(height * factor));
  s.fx *= factor;
  s.fy *= factor;
  s.ppx *= factor;
  s.ppy *= factor;
  return s;
}

void Intrinsics::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("camera resolution must be >= 1");
  if (!(fx > 0.0 && fy > 0.0)) throw std::invalid_argument("camera focal lengths must be > 0");
  if (!(ppx >= 0.0 && ppx < width && ppy >= 0.0 && ppy < height))
    throw std::invalid_argument("camera principal point must lie inside the frame");
  if (!(max_range > 0.0 && max_range <= 65535.0))
    throw std::invalid_argument("camera.max_range must lie in (0, 65535]");
}

void CorruptionParams::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0 && saturation_rate >= 0.0 &&
        saturation_rate <= 1.0))
    throw std::invalid_argument("corruption rates must lie in [0, 1]");
  if (blob_count < 0 || blob_radius < 0.0)
    throw std::invalid_argument("corruption blobs must be non-negative");
}

void EpisodeConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("episode.dt must be > 0");
  if (max_steps < 1) throw std::invalid_argument("episode.max_steps must be >= 1");
  if (!(robot_radius > 0.0)) throw std::invalid_argument("episode.robot_radius must be > 0");
  if (stop_hold_steps < 1) throw std::invalid_argument("episode.stop_hold_steps must be >= 1");
  if (jitter_y < 0.0 || jitter_theta < 0.0)
    throw std::invalid_argument("episode jitter must be non-negative");
  corruption.validate();
}

std::string_view to_string(EpisodeOutcome outcome) {
  switch (outcome) {
    case EpisodeOutcome::Completed: return "completed";
    case EpisodeOutcome::Collision: return "collision";
    case EpisodeOutcome::Stopped: return "stopped";
    case EpisodeOutcome::ClassifierFailure: return "classifier_failure";
    case EpisodeOutcome::Timeout: return "timeout";
  }
  return "?";
}

namespace {

struct CameraRig {
  Vector3d origin;
  Vector3d forward;
  Vector3d right;
  Vector3d down{0.0, 0.0, -1.0};

  CameraRig(const Pose& pose, const CameraMount& mount) {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    origin = {pose.x + mount.forward_offset * c, pose.y + mount.forward_offset * s, mount.height};
    forward = {c, s, 0.0};
    right = {s, -c, 0.0};
  }

  /// Ray with unit forward component, so the hit parameter is z-depth.
  Vector3d ray(double u, double v, const Intrinsics& intr) const {
    return forward + right * ((u - intr.ppx) / intr.fx) + down * ((v - intr.ppy) / intr.fy);
  }
};

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  SurfaceKind kind = SurfaceKind::None;
  Vector3d point = Vector3d::Zero();
};

bool in_hole(const WorldConfig& world, Side side, double x, double z) {
  for (const Hole& h : world.holes)
    if (h.side == side && x >= h.start && x <= h.start + h.length && z <= h.height) return true;
  return false;
}

Hit cast(const WorldConfig& world, const Vector3d& o, const Vector3d& dir) {
  Hit best;
  auto offer = [&](double t, SurfaceKind kind) {
    if (t > 0.0 && t < best.t) {
      best.t = t;
      best.kind = kind;
      best.point = o + t * dir;
    }
  };

  const double hw = world.half_width();
  if (dir.y() != 0.0) {
    for (const Side side : {Side::Left, Side::Right}) {
      const double wall_y = side == Side::Left ? hw : -hw;
      const double t = (wall_y - o.y()) / dir.y();
      if (t <= 0.0 || t >= best.t) continue;
      const Vector3d p = o + t * dir;
      if (p.x() < 0.0 || p.x() > world.row_length || p.z() < 0.0 || p.z() > world.wall_height)
        continue;
      if (in_hole(world, side, p.x(), p.z())) continue;
      offer(t, SurfaceKind::Wall);
    }
  }

  if (world.end_wall_x && dir.x() != 0.0) {
    const double t = (*world.end_wall_x - o.x()) / dir.x();
    if (t > 0.0 && t < best.t) {
      const Vector3d p = o + t * dir;
      if (std::abs(p.y()) <= hw && p.z() >= 0.0 && p.z() <= world.wall_height)
        offer(t, SurfaceKind::Wall);
    }
  }

  if (world.ground_plane && dir.z() < 0.0) offer(-o.z() / dir.z(), SurfaceKind::Ground);

  for (const Obstacle& ob : world.obstacles) {
    // Lateral surface: |(o + t dir - c)_xy| = r.
    const double ox = o.x() - ob.x;
    const double oy = o.y() - ob.lateral;
    const double a = dir.x() * dir.x() + dir.y() * dir.y();
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double c = ox * ox + oy * oy - ob.radius * ob.radius;
    const double disc = b * b - 4.0 * a * c;
    if (a > 0.0 && disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        const double z = o.z() + t * dir.z();
        if (t > 0.0 && z >= 0.0 && z <= ob.height) {
          offer(t, SurfaceKind::Obstacle);
          break;
        }
      }
    }
    // Top cap.
    if (dir.z() != 0.0) {
      const double t = (ob.height - o.z()) / dir.z();
      const double px = ox + t * dir.x();
      const double py = oy + t * dir.y();
      if (t > 0.0 && px * px + py * py <= ob.radius * ob.radius) offer(t, SurfaceKind::Obstacle);
    }
  }
  return best;
}

std::array<std::uint8_t, 3> shade(const Hit& hit) {
  const Vector3d& p = hit.point;
  const auto cell = [](double v, double size) { return long(std::floor(v / size)); };
  switch (hit.kind) {
    case SurfaceKind::None:
      return {200, 220, 255};
    case SurfaceKind::Wall: {
      const bool leaf = ((cell(p.x(), 0.25) + cell(p.z(), 0.25) + cell(p.y(), 0.25)) & 1) != 0;
      return leaf ? std::array<std::uint8_t, 3>{40, 110, 35} : std::array<std::uint8_t, 3>{70, 60, 30};
    }
    case SurfaceKind::Ground: {
      const bool dark = ((cell(p.x(), 0.5) + cell(p.y(), 0.5)) & 1) != 0;
      return dark ? std::array<std::uint8_t, 3>{95, 75, 50} : std::array<std::uint8_t, 3>{125, 100, 70};
    }
    case SurfaceKind::Obstacle:
      return {150, 40, 40};
  }
  return {0, 0, 0};
}

}  // namespace

RenderedView render_view(const WorldConfig& world, const Pose& pose, const Intrinsics& intr,
                         const CameraMount& mount, bool with_rgb) {
  const CameraRig rig(pose, mount);
  RenderedView view;
  view.depth.resize(intr.height, intr.width);
  if (with_rgb) view.rgb = RgbFrame(intr.height, intr.width);
  const double max_t = intr.max_range / 1000.0;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Hit hit = cast(world, rig.origin, rig.ray(u, v, intr));
      double mm = intr.max_range;
      if (hit.kind != SurfaceKind::None && hit.t < max_t) mm = std::max(1.0, hit.t * 1000.0);
      view.depth(v, u) = std::uint16_t(std::lround(mm));
      if (with_rgb) {
        const auto rgb = shade(hit);
        for (int c = 0; c < 3; ++c) view.rgb.at(v, u, c) = rgb[c];
      }
    }
  }
  return view;
}

DepthFrame render_depth(const WorldConfig& world, const Pose& pose, const Intrinsics& intr,
                        const CameraMount& mount) {
  return render_view(world, pose, intr, mount, false).depth;
}

RgbFrame motion_blur(const RgbFrame& frame, int radius) {
  if (radius <= 0) return frame;
  RgbFrame out(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      for (int c = 0; c < 3; ++c) {
        int sum = 0, n = 0;
        for (int k = std::max(0, x - radius); k <= std::min(frame.width - 1, x + radius); ++k, ++n)
          sum += frame.at(y, k, c);
        out.at(y, x, c) = std::uint8_t((sum + n / 2) / n);
      }
  return out;
}

std::optional<double> row_end_column(const WorldConfig& world, const Pose& pose,
                                     const Intrinsics& intr, const CameraMount& mount) {
  const CameraRig rig(pose, mount);
  const Vector3d rel = Vector3d(world.row_length, 0.0, mount.height) - rig.origin;
  const double ahead = rel.dot(rig.forward);
  if (ahead <= 0.0) return std::nullopt;
  return intr.ppx + intr.fx * rel.dot(rig.right) / ahead;
}

DepthFrame corrupt(const DepthFrame& frame, const CorruptionParams& params) {
  DepthFrame out = frame;
  if (!params.active()) return out;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int h = int(frame.rows());
  const int w = int(frame.cols());

  if (params.saturation_rate > 0.0)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (unit(rng) < params.saturation_rate) out(y, x) = params.saturation_value;

  const double r2 = params.blob_radius * params.blob_radius;
  for (int b = 0; b < params.blob_count; ++b) {
    const double cx = unit(rng) * w;
    const double cy = unit(rng) * h;
    const int y0 = std::max(0, int(std::floor(cy - params.blob_radius)));
    const int y1 = std::min(h - 1, int(std::ceil(cy + params.blob_radius)));
    const int x0 = std::max(0, int(std::floor(cx - params.blob_radius)));
    const int x1 = std::min(w - 1, int(std::ceil(cx + params.blob_radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r2) out(y, x) = params.saturation_value;
      }
  }

  if (params.dropout_rate > 0.0)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (params.dropout_rate >= 1.0 || unit(rng) < params.dropout_rate) out(y, x) = 0;
  return out;
}

Pose step_kinematics(const Pose& pose, const ControlCommand& cmd, double dt) {
  const double v = cmd.linear;
  const double w = cmd.angular;
  Pose next = pose;
  if (std::abs(w) < 1e-9) {
    next.x += v * std::cos(pose.theta) * dt;
    next.y += v * std::sin(pose.theta) * dt;
    next.theta = wrap_angle(pose.theta + w * dt);
    return next;
  }
  const double radius = v / w;
  const double heading = pose.theta + w * dt;
  next.x += radius * (std::sin(heading) - std::sin(pose.theta));
  next.y -= radius * (std::cos(heading) - std::cos(pose.theta));
  next.theta = wrap_angle(heading);
  return next;
}

double obstacle_clearance(const WorldConfig& world, const Pose& pose, double robot_radius) {
  double best = std::numeric_limits<double>::infinity();
  for (const Obstacle& ob : world.obstacles)
    best = std::min(best, std::hypot(pose.x - ob.x, pose.y - ob.lateral) - robot_radius - ob.radius);
  return best;
}

bool in_collision(const WorldConfig& world, const Pose& pose, double robot_radius) {
  if (pose.x >= 0.0 && pose.x <= world.row_length && std::abs(pose.y) + robot_radius >= world.half_width())
    return true;
  if (world.end_wall_x && std::abs(*world.end_wall_x - pose.x) <= robot_radius) return true;
  return obstacle_clearance(world, pose, robot_radius) <= 0.0;
}

std::optional<CorruptionParams> corruption_for_step(const EpisodeConfig& ep, int step) {
  const double t = step * ep.dt;
  if (!ep.corruption.active() || t < ep.corruption_start ||
      t >= ep.corruption_start + ep.corruption_duration)
    return std::nullopt;
  CorruptionParams c = ep.corruption;
  c.seed = ep.corruption.seed ^ (ep.seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(step));
  return c;
}

EpisodeLog run_episode(const WorldConfig& world, const SimSetup& setup) {
  const EpisodeConfig& ep = setup.episode;
  std::mt19937_64 rng(ep.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Pose pose = ep.start;
  pose.y += ep.jitter_y * unit(rng);
  pose.theta = wrap_angle(pose.theta + ep.jitter_theta * unit(rng));

  const bool need_rgb = ep.classifier == ClassifierChoice::Heuristic || ep.record_rgb;
  const HeuristicClassifier heuristic(setup.fallback);

  EpisodeLog log;
  log.frame_width = setup.intrinsics.width;
  ArbiterState state;
  int stop_streak = 0;

  for (int k = 0; k < ep.max_steps; ++k) {
    StepRecord rec;
    rec.t = k * ep.dt;
    rec.pose = pose;

    RenderedView view = render_view(world, pose, setup.intrinsics, setup.mount, need_rgb);
    if (const auto c = corruption_for_step(ep, k)) view.depth = corrupt(view.depth, *c);

    try {
      rec.oracle_view = oracle_classify(pose, world, setup.fallback);
    } catch (const OutsideCorridor&) {
    }
    std::optional<ViewClass> predicted;
    if (ep.classifier == ClassifierChoice::Oracle) {
      predicted = rec.oracle_view;
    } else if (ep.classifier == ClassifierChoice::Heuristic) {
      try {
        predicted = heuristic
                        .classify(preprocess_frame(view.rgb, setup.fallback.input_height,
                                                   setup.fallback.input_width))
                        .view;
      } catch (const ModelUnavailable&) {
      }
    }

    ArbiterResult result;
    const auto begin = std::chrono::steady_clock::now();
    try {
      result = arbiter_step(view.depth, predicted, state, setup.controller, setup.pipeline,
                            setup.fallback);
    } catch (const ClassifierUnavailable&) {
      log.outcome = EpisodeOutcome::ClassifierFailure;
      break;
    }
    rec.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
    state = result.state;
    rec.command = result.command;
    rec.detection = result.detection;
    rec.obstacle = result.obstacle;
    if (result.detection) rec.d = lateral_offset(*result.detection, setup.intrinsics.width);
    rec.true_column = row_end_column(world, pose, setup.intrinsics, setup.mount);
    if (ep.record_rgb) {
      const int blur = int(std::lround(std::abs(rec.command.angular) * ep.dt * setup.intrinsics.fx));
      log.rgb.push_back(motion_blur(view.rgb, blur));
    }
    log.steps.push_back(rec);

    pose = step_kinematics(pose, rec.command, ep.dt);
    stop_streak = rec.command.source == CommandSource::EmergencyStop ? stop_streak + 1 : 0;
    if (in_collision(world, pose, ep.robot_radius)) {
      log.outcome = EpisodeOutcome::Collision;
      break;
    }
    if (pose.x > world.row_length) {
      log.outcome = EpisodeOutcome::Completed;
      break;
    }
    if (stop_streak >= ep.stop_hold_steps) {
      log.outcome = EpisodeOutcome::Stopped;
      break;
    }
  }
  log.final_pose = pose;
  return log;
}

EpisodeMetrics metrics(const EpisodeLog& log, const WorldConfig& world, double robot_radius) {
  if (log.steps.empty()) throw EmptyLog();
  EpisodeMetrics m;
  m.completed = log.outcome == EpisodeOutcome::Completed;
  m.collision = log.outcome == EpisodeOutcome::Collision;
  m.stopped = log.outcome == EpisodeOutcome::Stopped;
  m.steps = int(log.steps.size());
  long fallback = 0;
  for (const StepRecord& s : log.steps) {
    const double ay = std::abs(s.pose.y);
    m.mean_abs_y += ay;
    m.max_abs_y = std::max(m.max_abs_y, ay);
    m.mean_latency_ms += s.latency_ms;
    if (s.command.source == CommandSource::Fallback) ++fallback;
  }
  m.mean_abs_y /= m.steps;
  m.mean_latency_ms /= m.steps;
  m.fallback_fraction = double(fallback) / m.steps;
  m.final_obstacle_clearance = obstacle_clearance(world, log.final_pose, robot_radius);
  return m;
}

}  // namespace rowpilot
