#include "rowpilot/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include "rowpilot/io.hpp"

namespace rowpilot {

using io::ErrorKind;
using io::ParseError;

SimSetup Config::sim_setup() const {
  SimSetup s;
  s.controller = controller;
  s.pipeline = pipeline;
  s.fallback = fallback;
  s.intrinsics = intrinsics();
  s.controller.frame_width = s.intrinsics.width;
  s.mount = mount;
  s.episode = episode;
  return s;
}

void Config::validate() const {
  pipeline.validate();
  controller.validate();
  fallback.validate();
  world.validate();
  camera.validate();
  if (!(camera_scale > 0.0 && camera_scale <= 4.0))
    throw std::invalid_argument("camera.scale must lie in (0, 4]");
  intrinsics().validate();
  if (!(mount.height > 0.0 && mount.height < world.wall_height + 10.0))
    throw std::invalid_argument("camera.mount_height must be > 0");
  episode.validate();
  if (episodes < 1) throw std::invalid_argument("episode.count must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Ctx {
  std::string_view key;
  std::size_t line;

  [[noreturn]] void mismatch(const char* expected) const {
    throw ParseError(ErrorKind::TypeMismatch, line, std::string(key) + " expects " + expected);
  }
};

double to_double(std::string_view v, const Ctx& ctx) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || std::isnan(out))
    ctx.mismatch("a number");
  return out;
}

template <typename Int>
Int to_int(std::string_view v, const Ctx& ctx) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) ctx.mismatch("an integer");
  return out;
}

bool to_bool(std::string_view v, const Ctx& ctx) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  ctx.mismatch("true or false");
}

std::vector<double> to_tuple(std::string_view v, std::size_t n, const Ctx& ctx,
                             std::string_view* first_word = nullptr) {
  std::vector<double> out;
  std::size_t start = 0;
  std::size_t index = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    const std::string_view part = trim(v.substr(start, comma - start));
    if (index == 0 && first_word) {
      *first_word = part;
    } else {
      out.push_back(to_double(part, ctx));
    }
    ++index;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (index != n) ctx.mismatch((std::to_string(n) + " comma-separated values").c_str());
  return out;
}

std::string fmt(double v) { return io::format_double(v); }

struct Field {
  std::string key;
  std::function<void(Config&, std::string_view, const Ctx&)> set;
  /// One entry per output line (repeatable keys may emit several or none).
  std::function<std::vector<std::string>(const Config&)> get;
};

template <typename Member>
Field number_field(std::string key, Member member) {
  return {key,
          [member](Config& c, std::string_view v, const Ctx& ctx) {
            auto& ref = member(c);
            using T = std::remove_reference_t<decltype(ref)>;
            if constexpr (std::is_floating_point_v<T>)
              ref = to_double(v, ctx);
            else
              ref = to_int<T>(v, ctx);
          },
          [member](const Config& c) {
            auto& ref = member(const_cast<Config&>(c));
            using T = std::remove_reference_t<decltype(ref)>;
            if constexpr (std::is_floating_point_v<T>)
              return std::vector<std::string>{fmt(ref)};
            else
              return std::vector<std::string>{std::to_string(ref)};
          }};
}

#define ROWPILOT_NUM(key, expr) number_field(key, [](Config& c) -> auto& { return c.expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        ROWPILOT_NUM("pipeline.t_distance", pipeline.t_distance),
        ROWPILOT_NUM("pipeline.t_area", pipeline.t_area),
        ROWPILOT_NUM("pipeline.stop_distance", pipeline.stop_distance),
        ROWPILOT_NUM("pipeline.stop_fraction", pipeline.stop_fraction),
        ROWPILOT_NUM("pipeline.stop_roi_fraction", pipeline.stop_roi_fraction),
        ROWPILOT_NUM("pipeline.min_far_depth", pipeline.min_far_depth),
        ROWPILOT_NUM("controller.max_lin_vel", controller.max_lin_vel),
        ROWPILOT_NUM("controller.max_ang_vel", controller.max_ang_vel),
        ROWPILOT_NUM("controller.frame_width", controller.frame_width),
        ROWPILOT_NUM("controller.fallback_engage_count", controller.fallback_engage_count),
        ROWPILOT_NUM("controller.fallback_release_count", controller.fallback_release_count),
        ROWPILOT_NUM("fallback.turn_ang_vel", fallback.turn_ang_vel),
        ROWPILOT_NUM("fallback.turn_lin_vel", fallback.turn_lin_vel),
        ROWPILOT_NUM("fallback.center_lin_vel", fallback.center_lin_vel),
        ROWPILOT_NUM("fallback.center_band", fallback.center_band),
        ROWPILOT_NUM("fallback.reference_width", fallback.reference_width),
        ROWPILOT_NUM("fallback.oracle_center_half_angle", fallback.oracle_center_half_angle),
        ROWPILOT_NUM("fallback.input_height", fallback.input_height),
        ROWPILOT_NUM("fallback.input_width", fallback.input_width),
        ROWPILOT_NUM("world.row_length", world.row_length),
        ROWPILOT_NUM("world.row_spacing", world.row_spacing),
        ROWPILOT_NUM("world.wall_height", world.wall_height),
        {"world.ground_plane",
         [](Config& c, std::string_view v, const Ctx& ctx) { c.world.ground_plane = to_bool(v, ctx); },
         [](const Config& c) {
           return std::vector<std::string>{c.world.ground_plane ? "true" : "false"};
         }},
        {"world.end_wall_x",
         [](Config& c, std::string_view v, const Ctx& ctx) {
           if (v == "none")
             c.world.end_wall_x.reset();
           else
             c.world.end_wall_x = to_double(v, ctx);
         },
         [](const Config& c) {
           return std::vector<std::string>{c.world.end_wall_x ? fmt(*c.world.end_wall_x) : "none"};
         }},
        {"world.hole",
         [](Config& c, std::string_view v, const Ctx& ctx) {
           std::string_view side;
           const auto n = to_tuple(v, 4, ctx, &side);
           if (side != "left" && side != "right") ctx.mismatch("side left or right first");
           c.world.holes.push_back(
               {side == "left" ? Side::Left : Side::Right, n[0], n[1], n[2]});
         },
         [](const Config& c) {
           std::vector<std::string> out;
           for (const Hole& h : c.world.holes)
             out.push_back(std::string(h.side == Side::Left ? "left" : "right") + ", " +
                           fmt(h.start) + ", " + fmt(h.length) + ", " + fmt(h.height));
           return out;
         }},
        {"world.obstacle",
         [](Config& c, std::string_view v, const Ctx& ctx) {
           const auto n = to_tuple(v, 4, ctx);
           c.world.obstacles.push_back({n[0], n[1], n[2], n[3]});
         },
         [](const Config& c) {
           std::vector<std::string> out;
           for (const Obstacle& o : c.world.obstacles)
             out.push_back(fmt(o.x) + ", " + fmt(o.lateral) + ", " + fmt(o.radius) + ", " +
                           fmt(o.height));
           return out;
         }},
        ROWPILOT_NUM("camera.width", camera.width),
        ROWPILOT_NUM("camera.height", camera.height),
        ROWPILOT_NUM("camera.fx", camera.fx),
        ROWPILOT_NUM("camera.fy", camera.fy),
        ROWPILOT_NUM("camera.ppx", camera.ppx),
        ROWPILOT_NUM("camera.ppy", camera.ppy),
        ROWPILOT_NUM("camera.max_range", camera.max_range),
        ROWPILOT_NUM("camera.scale", camera_scale),
        ROWPILOT_NUM("camera.mount_height", mount.height),
        ROWPILOT_NUM("camera.forward_offset", mount.forward_offset),
        ROWPILOT_NUM("corruption.dropout_rate", episode.corruption.dropout_rate),
        ROWPILOT_NUM("corruption.saturation_rate", episode.corruption.saturation_rate),
        ROWPILOT_NUM("corruption.blob_count", episode.corruption.blob_count),
        ROWPILOT_NUM("corruption.blob_radius", episode.corruption.blob_radius),
        ROWPILOT_NUM("corruption.saturation_value", episode.corruption.saturation_value),
        ROWPILOT_NUM("corruption.seed", episode.corruption.seed),
        ROWPILOT_NUM("corruption.start", episode.corruption_start),
        ROWPILOT_NUM("corruption.duration", episode.corruption_duration),
        ROWPILOT_NUM("episode.dt", episode.dt),
        ROWPILOT_NUM("episode.max_steps", episode.max_steps),
        ROWPILOT_NUM("episode.start_x", episode.start.x),
        ROWPILOT_NUM("episode.start_y", episode.start.y),
        ROWPILOT_NUM("episode.start_theta", episode.start.theta),
        ROWPILOT_NUM("episode.jitter_y", episode.jitter_y),
        ROWPILOT_NUM("episode.jitter_theta", episode.jitter_theta),
        {"episode.classifier",
         [](Config& c, std::string_view v, const Ctx& ctx) {
           if (v == "none")
             c.episode.classifier = ClassifierChoice::None;
           else if (v == "oracle")
             c.episode.classifier = ClassifierChoice::Oracle;
           else if (v == "heuristic")
             c.episode.classifier = ClassifierChoice::Heuristic;
           else
             ctx.mismatch("none, oracle or heuristic");
         },
         [](const Config& c) {
           switch (c.episode.classifier) {
             case ClassifierChoice::Oracle: return std::vector<std::string>{"oracle"};
             case ClassifierChoice::Heuristic: return std::vector<std::string>{"heuristic"};
             case ClassifierChoice::None: break;
           }
           return std::vector<std::string>{"none"};
         }},
        ROWPILOT_NUM("episode.robot_radius", episode.robot_radius),
        ROWPILOT_NUM("episode.stop_hold_steps", episode.stop_hold_steps),
        ROWPILOT_NUM("episode.count", episodes),
    };
    return f;
  }();
  return table;
}

#undef ROWPILOT_NUM

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

Config parse_config(std::string_view text) {
  Config config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(ErrorKind::MalformedRecord, line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end())
      throw ParseError(ErrorKind::UnknownKey, line_no, "unknown key '" + std::string(key) + "'");
    it->set(config, value, Ctx{key, line_no});
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(ErrorKind::InvalidValue, 0, e.what());
  }
  return config;
}

std::string write_config(const Config& config) {
  std::string out;
  for (const Field& f : fields())
    for (const std::string& value : f.get(config)) out += f.key + " = " + value + "\n";
  return out;
}

Config load_config(const std::filesystem::path& path) {
  const io::Bytes bytes = io::read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace rowpilot
