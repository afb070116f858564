#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "rowpilot/control.hpp"
#include "rowpilot/fallback.hpp"
#include "rowpilot/sim.hpp"

using namespace rowpilot;

namespace {

Detection at_column(double center_x) {
  Detection d;
  d.center_x = center_x;
  return d;
}

}  // namespace

TEST_CASE("lateral offset") {
  CHECK(lateral_offset(at_column(320), 640) == 0.0);
  CHECK(lateral_offset(at_column(640), 640) == 320.0);
  CHECK(lateral_offset(at_column(160), 640) == -160.0);
  CHECK(lateral_offset(at_column(319.5), 640) == -0.5);
}

TEST_CASE("parabolic laws at the plotted reference values") {
  const ControllerParams p;  // w = 640, max 1 m/s, 1 rad/s
  CHECK(angular_velocity(0.0, p) == 0.0);
  CHECK(angular_velocity(320.0, p) == -1.0);
  CHECK(angular_velocity(160.0, p) == -0.25);
  CHECK(angular_velocity(-160.0, p) == 0.25);
  CHECK(linear_velocity(0.0, p) == 1.0);
  CHECK(linear_velocity(320.0, p) == 0.0);
  CHECK(linear_velocity(-320.0, p) == 0.0);
  CHECK(linear_velocity(160.0, p) == 0.75);

  // Scalar-generic.
  CHECK(angular_velocity(160.0f, p) == -0.25f);
  CHECK(linear_velocity(160.0L, p) == 0.75L);
}

TEST_CASE("complementarity, antisymmetry and saturation over random offsets") {
  std::mt19937_64 rng(1);
  ControllerParams p;
  p.max_lin_vel = 0.8;
  p.max_ang_vel = 1.7;
  p.frame_width = 424;
  std::uniform_real_distribution<double> dist(-212.0, 212.0);
  for (int i = 0; i < 10000; ++i) {
    const double d = dist(rng);
    const double v = linear_velocity(d, p);
    const double w = angular_velocity(d, p);
    CHECK(std::abs(v / p.max_lin_vel + std::abs(w) / p.max_ang_vel - 1.0) <= 1e-12);
    CHECK(v <= p.max_lin_vel);
    CHECK(v >= 0.0);
    CHECK(std::abs(w) <= p.max_ang_vel);
    if (d != 0.0) CHECK(angular_velocity(-d, p) == -w);
    if (d > 0.0) CHECK(w < 0.0);
    if (d < 0.0) CHECK(w > 0.0);
  }
}

TEST_CASE("controller parameter validation") {
  ControllerParams p;
  CHECK_NOTHROW(p.validate());
  p.frame_width = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.fallback_engage_count = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("arbiter: emergency stop overrides every mode and view") {
  const ControllerParams params;
  const DepthPipelineParams pipeline;
  const FallbackParams fallback;
  const DepthFrame wall = DepthFrame::Constant(48, 64, 300);
  for (const auto mode : {ArbiterMode::Depth, ArbiterMode::Fallback}) {
    for (const auto view : {std::optional<ViewClass>{}, std::optional(ViewClass::Left),
                            std::optional(ViewClass::Center)}) {
      ArbiterState s;
      s.mode = mode;
      s.consecutive_depth_failures = 2;
      s.consecutive_depth_successes = 4;
      const auto r = arbiter_step(wall, view, s, params, pipeline, fallback);
      CHECK(r.command == ControlCommand::stop());
      CHECK(r.obstacle);
      CHECK(r.state.mode == mode);
      CHECK(r.state.consecutive_depth_failures == 0);
      CHECK(r.state.consecutive_depth_successes == 0);
    }
  }
}

TEST_CASE("arbiter: emergency stop on random frames and states") {
  std::mt19937_64 rng(8);
  const ControllerParams params;
  const DepthPipelineParams pipeline;
  const FallbackParams fallback;
  std::uniform_int_distribution<int> depth(0, 8000);
  for (int i = 0; i < 300; ++i) {
    DepthFrame f(24, 30);
    for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = std::uint16_t(depth(rng));
    ArbiterState s;
    s.mode = rng() % 2 ? ArbiterMode::Depth : ArbiterMode::Fallback;
    s.consecutive_depth_failures = int(rng() % 5);
    s.consecutive_depth_successes = int(rng() % 5);
    if (rng() % 2) s.last_depth_command = ControlCommand{0.3, 0.1, CommandSource::Depth};
    const auto view = std::optional(ViewClass(rng() % 3));
    if (check_obstacle(f, pipeline)) {
      CHECK(arbiter_step(f, view, s, params, pipeline, fallback).command == ControlCommand::stop());
    } else {
      CHECK(arbiter_step(f, view, s, params, pipeline, fallback).command.source !=
            CommandSource::EmergencyStop);
    }
  }
}

TEST_CASE("arbiter: centered corridor frame drives straight on depth") {
  const WorldConfig world;
  const ControllerParams params;
  const double one_px = params.max_ang_vel * (1.0 / 320.0) * (1.0 / 320.0);

  SUBCASE("symmetric principal point: within one pixel of quantization") {
    Intrinsics intr;
    intr.ppx = 319.5;
    const DepthFrame f = render_depth(world, Pose{}, intr, CameraMount{0.4, 0.0});
    const auto r = arbiter_step(f, std::nullopt, ArbiterState{}, params, {}, {});
    REQUIRE(r.detection);
    CHECK(r.command.source == CommandSource::Depth);
    CHECK(std::abs(lateral_offset(*r.detection, intr.width)) <= 1.0);
    CHECK(std::abs(r.command.angular) <= one_px);
    CHECK(r.state.consecutive_depth_successes == 1);
  }

  SUBCASE("calibrated intrinsics: offset bounded by the principal point shift") {
    const Intrinsics intr;
    const DepthFrame f = render_depth(world, Pose{}, intr, CameraMount{0.4, 0.0});
    const auto r = arbiter_step(f, std::nullopt, ArbiterState{}, params, {}, {});
    REQUIRE(r.detection);
    const double bound = std::abs(intr.ppx - 320.0) + 1.0;
    CHECK(std::abs(lateral_offset(*r.detection, intr.width)) <= bound);
    CHECK(std::abs(r.command.angular) <= one_px * bound * bound);
  }
}

TEST_CASE("arbiter: hysteresis on a scripted corrupted sequence") {
  const WorldConfig world;
  Intrinsics intr = Intrinsics{}.scaled(0.25);
  const DepthFrame good = render_depth(world, Pose{}, intr);
  // Uniform glare: no far field, nothing near enough to stop for.
  const DepthFrame glare = DepthFrame::Constant(intr.height, intr.width, 700);
  ControllerParams params;  // engage 3, release 5
  const DepthPipelineParams pipeline;
  const FallbackParams fallback;

  ArbiterState s;
  auto r = arbiter_step(good, ViewClass::Center, s, params, pipeline, fallback);
  REQUIRE(r.command.source == CommandSource::Depth);
  const ControlCommand depth_cmd = r.command;
  s = r.state;

  // Two failures re-issue the held depth command.
  for (int i = 1; i <= 2; ++i) {
    r = arbiter_step(glare, ViewClass::Center, s, params, pipeline, fallback);
    CHECK(r.command == depth_cmd);
    CHECK(r.state.mode == ArbiterMode::Depth);
    s = r.state;
  }
  // Third failure engages the fallback.
  r = arbiter_step(glare, ViewClass::Center, s, params, pipeline, fallback);
  CHECK(r.command == discrete_command(ViewClass::Center, fallback));
  CHECK(r.state.mode == ArbiterMode::Fallback);
  s = r.state;

  // Four good frames keep the fallback in charge, the fifth releases it.
  for (int i = 1; i <= 4; ++i) {
    r = arbiter_step(good, ViewClass::Left, s, params, pipeline, fallback);
    CHECK(r.command == discrete_command(ViewClass::Left, fallback));
    s = r.state;
  }
  r = arbiter_step(good, ViewClass::Left, s, params, pipeline, fallback);
  CHECK(r.command.source == CommandSource::Depth);
  CHECK(r.state.mode == ArbiterMode::Depth);
}

TEST_CASE("arbiter: engage count of one switches on the first failure") {
  ControllerParams params;
  params.fallback_engage_count = 1;
  params.fallback_release_count = 1;
  const DepthFrame glare = DepthFrame::Constant(30, 40, 700);
  ArbiterState s;
  s.last_depth_command = ControlCommand{1.0, 0.0, CommandSource::Depth};
  const auto r = arbiter_step(glare, ViewClass::Right, s, params, {}, {});
  CHECK(r.command.source == CommandSource::Fallback);
  CHECK(r.command.angular > 0.0);
}

TEST_CASE("arbiter: depth failure without a classifier") {
  const DepthFrame glare = DepthFrame::Constant(30, 40, 700);
  CHECK_THROWS_AS(arbiter_step(glare, std::nullopt, ArbiterState{}, {}, {}, {}), ClassifierUnavailable);
}
