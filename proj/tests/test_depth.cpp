#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "rowpilot/depth.hpp"
#include "rowpilot/sim.hpp"

using namespace rowpilot;

namespace {

DepthFrame frame_of(int h, int w, std::initializer_list<std::uint16_t> values) {
  DepthFrame f(h, w);
  std::copy(values.begin(), values.end(), f.data());
  return f;
}

DepthFrame random_frame(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> v(0, kMaxDepthMm);
  DepthFrame f(h, w);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = std::uint16_t(v(rng));
  return f;
}

}  // namespace

TEST_CASE("normalize_depth divides by the frame maximum") {
  const auto uniform = normalize_depth<double>(DepthFrame::Constant(4, 5, 4000));
  CHECK((uniform == 1.0).all());

  const auto nd = normalize_depth<double>(frame_of(2, 2, {8000, 4000, 2000, 0}));
  CHECK(nd(0, 0) == 1.0);
  CHECK(nd(0, 1) == 0.5);
  CHECK(nd(1, 0) == 0.25);
  CHECK(nd(1, 1) == 0.0);

  CHECK_THROWS_AS(normalize_depth(DepthFrame::Zero(3, 3)), AllInvalidError);
  CHECK_THROWS_AS(normalize_depth(DepthFrame()), AllInvalidError);
}

TEST_CASE("normalized maximum is exactly one for any frame with a valid pixel") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    DepthFrame f = random_frame(rng, 1 + int(rng() % 20), 1 + int(rng() % 20));
    f(0, 0) = std::max<std::uint16_t>(f(0, 0), 1);
    CHECK(normalize_depth<float>(f).maxCoeff() == 1.0f);
    CHECK(normalize_depth<double>(f).maxCoeff() == 1.0);
  }
}

TEST_CASE("normalization idempotence up to one ulp") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    DepthFrame f = random_frame(rng, 8, 8);
    f(3, 3) = kMaxDepthMm;
    const auto once = normalize_depth<double>(f);
    const DepthFrame rescaled = (once * kMaxDepthMm).round().cast<std::uint16_t>().matrix();
    const auto twice = normalize_depth<double>(rescaled);
    for (Eigen::Index k = 0; k < once.size(); ++k)
      CHECK(std::abs(twice.data()[k] - once.data()[k]) <= std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("threshold_far_field uses a strict comparison") {
  const auto nd = normalize_depth<double>(frame_of(2, 2, {8000, 4000, 2000, 0}));
  const BinaryMask at_half = threshold_far_field(nd, 0.5);
  CHECK(at_half(0, 0) == 1);
  CHECK(at_half(0, 1) == 0);
  CHECK(at_half(1, 0) == 0);
  CHECK(at_half(1, 1) == 0);
  const BinaryMask low = threshold_far_field(nd, 0.2);
  CHECK(low.cast<int>().sum() == 3);
  CHECK(low(1, 1) == 0);
}

TEST_CASE("near-one threshold keeps only the unique argmax") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    DepthFrame f = random_frame(rng, 12, 17);
    f = f.cwiseMin(std::uint16_t(7000));
    const int ay = int(rng() % 12), ax = int(rng() % 17);
    f(ay, ax) = 7999;
    const BinaryMask m = threshold_far_field(normalize_depth<double>(f), 0.9999);
    // Brute-force scan.
    int ones = 0;
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 17; ++x)
        if (m(y, x)) {
          ++ones;
          CHECK(y == ay);
          CHECK(x == ax);
        }
    CHECK(ones == 1);
  }
}

TEST_CASE("threshold monotonicity and scale invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.01, 0.99);
  for (int i = 0; i < 200; ++i) {
    DepthFrame f = random_frame(rng, 10, 10);
    f(0, 0) = 1000;  // keep at least one valid pixel
    double t1 = t(rng), t2 = t(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto nd = normalize_depth<double>(f);
    const BinaryMask m1 = threshold_far_field(nd, t1);
    const BinaryMask m2 = threshold_far_field(nd, t2);
    CHECK(((m2 != 0) <= (m1 != 0)).all());

    // Power-of-two scaling is exact, so the mask must not change.
    const DepthFrame halved = (f.array() / std::uint16_t(2) * std::uint16_t(2)).matrix();
    const DepthFrame half = (halved.array() / std::uint16_t(2)).matrix();
    if (half.maxCoeff() == 0) continue;
    CHECK((threshold_far_field(normalize_depth<double>(halved), t1) ==
           threshold_far_field(normalize_depth<double>(half), t1))
              .all());
  }
}

TEST_CASE("select_window picks the largest box at or above t_area") {
  CHECK_FALSE(select_window({}, 1.0, 64).has_value());

  const ComponentBox small{0, 0, 4, 9};   // 50
  const ComponentBox large{20, 0, 39, 9};  // 200
  auto det = select_window({small, large}, 100.0, 64);
  REQUIRE(det.has_value());
  CHECK(det->window == large);
  CHECK(det->center_x == doctest::Approx(29.5));

  const ComponentBox eighty{0, 0, 7, 9};
  CHECK_FALSE(select_window({small, eighty}, 100.0, 64).has_value());
  // Equal to threshold passes.
  CHECK(select_window({large}, 200.0, 64).has_value());
}

TEST_CASE("select_window ties prefer the box nearest the frame center, order-independent") {
  const ComponentBox left{0, 0, 9, 9};
  const ComponentBox middle{27, 20, 36, 29};
  const ComponentBox right{50, 0, 59, 9};
  for (const auto& order : {std::vector{left, middle, right}, std::vector{right, left, middle},
                            std::vector{middle, right, left}}) {
    const auto det = select_window(order, 1.0, 64);
    REQUIRE(det);
    CHECK(det->window == middle);
  }
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    auto boxes = oracle::flood_fill_boxes(oracle::random_mask(rng, 20, 20, 0.3));
    const auto a = select_window(boxes, 1.0, 20);
    std::shuffle(boxes.begin(), boxes.end(), rng);
    const auto b = select_window(boxes, 1.0, 20);
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(a->window == b->window);
  }
}

TEST_CASE("detect_row_end on simulator frames") {
  WorldConfig world;
  const Intrinsics intr;
  DepthPipelineParams params;

  SUBCASE("centered corridor: window centered on the row end") {
    const DepthFrame f = render_depth(world, Pose{0.0, 0.0, 0.0}, intr, CameraMount{0.4, 0.0});
    const auto det = detect_row_end(f, params);
    REQUIRE(det);
    const auto truth = row_end_column(world, Pose{}, intr, CameraMount{0.4, 0.0});
    REQUIRE(truth);
    CHECK(std::abs(det->center_x - intr.width / 2.0) < 5.0);
    CHECK(det->window.x_min <= *truth);
    CHECK(det->window.x_max >= *truth);
  }

  SUBCASE("saturated near frame has no window") {
    CHECK_FALSE(detect_row_end(DepthFrame::Constant(480, 640, 500), params).has_value());
  }

  SUBCASE("all-invalid frame maps to no window") {
    CHECK_FALSE(detect_row_end(DepthFrame::Zero(48, 64), params).has_value());
  }

  SUBCASE("a small side hole does not steal the window") {
    world.holes.push_back({Side::Left, 3.0, 0.6, 0.8});
    const Pose pose{0.0, 0.0, 0.0};
    const DepthFrame f = render_depth(world, pose, intr);
    const BinaryMask mask = threshold_far_field(normalize_depth<float>(f), 0.5f);
    const auto boxes = extract_components(mask);
    CHECK(boxes.size() >= 2);  // the hole is a separate far-field blob
    const auto det = detect_row_end(f, params);
    REQUIRE(det);
    const auto truth = row_end_column(world, pose, intr);
    CHECK(det->window.x_min <= *truth);
    CHECK(det->window.x_max >= *truth);
  }
}

TEST_CASE("check_obstacle counts near pixels in the central band") {
  DepthPipelineParams params;
  const auto [first, last] = obstacle_roi_columns(640, params.stop_roi_fraction);
  CHECK(last - first + 1 == 213);

  DepthFrame near = DepthFrame::Constant(48, 640, 7000);
  near.middleCols(first, last - first + 1).setConstant(300);
  CHECK(check_obstacle(near, params));
  CHECK_FALSE(check_obstacle(DepthFrame::Constant(48, 640, 7000), params));

  // Walls at the frame edges are ignored.
  DepthFrame edges = DepthFrame::Constant(48, 640, 7000);
  edges.leftCols(first).setConstant(100);
  edges.rightCols(640 - last - 1).setConstant(100);
  CHECK_FALSE(check_obstacle(edges, params));

  // No valid pixel in the band: fail safe.
  DepthFrame blind = DepthFrame::Constant(48, 640, 7000);
  blind.middleCols(first, last - first + 1).setZero();
  CHECK(check_obstacle(blind, params));
}

TEST_CASE("check_obstacle agrees with a counting oracle") {
  DepthPipelineParams params;
  std::mt19937_64 rng(23);
  const int h = 30, w = 90;
  const auto [first, last] = obstacle_roi_columns(w, params.stop_roi_fraction);
  for (double fraction : {0.0, 0.02, 0.04, 0.06, 0.1, 0.5}) {
    DepthFrame f = DepthFrame::Constant(h, w, 6000);
    std::vector<std::pair<int, int>> roi;
    for (int y = 0; y < h; ++y)
      for (int x = first; x <= last; ++x) roi.push_back({y, x});
    std::shuffle(roi.begin(), roi.end(), rng);
    const int n_near = int(std::lround(fraction * double(roi.size())));
    for (int i = 0; i < n_near; ++i) f(roi[i].first, roi[i].second) = 300;
    const bool expected = double(n_near) / double(roi.size()) > params.stop_fraction;
    CHECK(check_obstacle(f, params) == expected);
  }
  // 10% of the band at 300 mm trips the 5% threshold.
  DepthFrame tenth = DepthFrame::Constant(h, w, 6000);
  tenth.block(0, first, 3, last - first + 1).setConstant(300);
  CHECK(check_obstacle(tenth, params));
}

TEST_CASE("pipeline parameter validation") {
  DepthPipelineParams p;
  CHECK_NOTHROW(p.validate());
  p.t_distance = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.stop_roi_fraction = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(DepthPipelineParams{}.area_threshold(480, 640) == doctest::Approx(3072.0));
}
