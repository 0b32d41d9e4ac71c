#include <gtest/gtest.h>

#include "support.hpp"
#include "vpp/pipeline/metrics.hpp"

using namespace vpp;

TEST(QuadIou, MatchesPolygonClippingOracle) {
  // Reference value from shapely on the same two polygons.
  const Quad a{{Point2{0, 0}, Point2{20, 2}, Point2{18, 15}, Point2{1, 12}}};
  const Quad b{{Point2{5, -3}, Point2{25, 4}, Point2{22, 20}, Point2{3, 14}}};
  EXPECT_NEAR(quad_iou(a, b), 0.506154280659, 1e-9);
  EXPECT_DOUBLE_EQ(quad_iou(a, a), 1.0);
  Quad far = a;
  for (auto& p : far.corners) p = p + Point2{80, 0};
  EXPECT_EQ(quad_iou(a, far), 0.0);
  const Quad bow{{Point2{0, 0}, Point2{10, 10}, Point2{10, 0}, Point2{0, 10}}};  // self-intersecting
  EXPECT_THROW(quad_iou(a, bow), Error);
}

TEST(QuadIou, SymmetricAndBoundedProperty) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 500; ++i) {
    const Quad a = testkit::random_convex_quad(rng, 50, 50, 20, 8);
    const Quad b = testkit::random_convex_quad(rng, 55, 48, 18, 8);
    const double ab = quad_iou(a, b), ba = quad_iou(b, a);
    ASSERT_NEAR(ab, ba, 1e-9);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
  }
}

TEST(AngleDeviation, KnownRotation) {
  const Quad a = rect_to_quad({0, 0, 11, 11});
  EXPECT_DOUBLE_EQ(angle_deviation(a, a), 0.0);
  // Rotate by 10 degrees about the centre.
  Quad r = a;
  const double t = 10.0 * std::numbers::pi / 180.0;
  for (auto& p : r.corners) {
    const Point2 d = p - Point2{5, 5};
    p = Point2{5 + d.x * std::cos(t) - d.y * std::sin(t), 5 + d.x * std::sin(t) + d.y * std::cos(t)};
  }
  EXPECT_NEAR(angle_deviation(a, r), 10.0, 1e-9);
  // Reversed edge direction counts as parallel.
  const Quad flipped{{a[2], a[3], a[0], a[1]}};
  EXPECT_NEAR(angle_deviation(a, flipped), 0.0, 1e-9);
  const Quad pinched{{a[0], a[0], a[2], a[3]}};
  EXPECT_THROW(angle_deviation(a, pinched), Error);
}

TEST(Report, CountsAndMeans) {
  const Quad q = rect_to_quad({0, 0, 10, 10});
  Quad half = q;
  for (auto& p : half.corners) p = p + Point2{4.5, 0};
  std::vector<FrameOutcome> r(4);
  for (int i = 0; i < 4; ++i) r[static_cast<std::size_t>(i)].frame = i;
  r[0].is_kitchen = r[1].is_kitchen = r[2].is_kitchen = true;
  r[0].quad = q;
  r[1].quad = half;
  r[1].reproj_error = 0.5;
  r[2].reproj_error = 1.5;
  r[0].stage_ms["total"] = 100;
  r[1].stage_ms["total"] = 100;
  const std::map<int, Quad> gt{{0, q}, {1, q}, {2, q}};
  const auto m = report_metrics(r, gt, 0.5);
  EXPECT_EQ(m.frames, 4u);
  EXPECT_EQ(m.kitchen_frames, 3u);
  EXPECT_EQ(m.placed_frames, 2u);
  EXPECT_EQ(m.gt_frames, 3u);
  // IoU(q, half): 4.5 x 9 overlap over 2 * 81 - 40.5.
  const double iou_half = 40.5 / 121.5;
  EXPECT_EQ(m.gt_overlap, 1u);
  EXPECT_NEAR(*m.mean_iou, (1.0 + iou_half + 0.0) / 3.0, 1e-12);
  EXPECT_NEAR(*m.mean_angle_deviation, 0.0, 1e-12);
  EXPECT_NEAR(*m.mean_reproj_error, 1.0, 1e-12);
  EXPECT_NEAR(m.fps.at("total"), 4000.0 / 200.0, 1e-9);
  const json j = m.to_json(false);
  EXPECT_FALSE(j.contains("fps"));
  EXPECT_TRUE(m.to_json().contains("fps"));
  const auto empty = report_metrics({});
  EXPECT_FALSE(empty.mean_iou);
  EXPECT_TRUE(empty.to_json().at("mean_iou").is_null());
}

TEST(GroundTruth, ParsesAndRejects) {
  const auto gt = ground_truth_from_json(
      json::parse(R"({"frames":[{"frame":2,"quad":[[0,0],[4,0],[4,3],[0,3]]}]})"));
  ASSERT_EQ(gt.size(), 1u);
  EXPECT_EQ(gt.at(2)[2], (Point2{4, 3}));
  try {
    ground_truth_from_json(json::parse(R"({"frames":[{"frame":2}]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format_error);
  }
}
