#include <gtest/gtest.h>

#include "support.hpp"
#include "vpp/pipeline/bench.hpp"
#include "vpp/tracker/tracking.hpp"

using namespace vpp;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io_error;
}

}  // namespace

TEST(TrackQuad, FollowsTranslation) {
  const Quad q = rect_to_quad({10, 10, 40, 30});
  const Quad t = track_quad(q, Homography::translation(-2, 1));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(distance(t[i], q[i] + Point2{-2, 1}), 0, 1e-12);
}

TEST(TrackQuad, RejectsDegenerateResults) {
  const Quad q = rect_to_quad({10, 10, 40, 30});
  Eigen::Matrix3d shrink = Eigen::Matrix3d::Identity();
  shrink(0, 0) = shrink(1, 1) = 0.4;
  EXPECT_EQ(code_of([&] { track_quad(q, Homography(shrink)); }), ErrorCode::degenerate_track);
  Eigen::Matrix3d grow = Eigen::Matrix3d::Identity();
  grow(0, 0) = grow(1, 1) = 2.1;
  EXPECT_EQ(code_of([&] { track_quad(q, Homography(grow)); }), ErrorCode::degenerate_track);
  // Sends a corner to the line at infinity.
  Eigen::Matrix3d proj = Eigen::Matrix3d::Identity();
  proj(2, 0) = -1.0 / 49.0;
  EXPECT_EQ(code_of([&] { track_quad(q, Homography(proj)); }), ErrorCode::degenerate_track);
  // Within the 4x band both ways.
  Eigen::Matrix3d ok = Eigen::Matrix3d::Identity();
  ok(0, 0) = ok(1, 1) = 1.9;
  EXPECT_NO_THROW(track_quad(q, Homography(ok)));
}

TEST(Reprojection, MeanCornerDistanceAfterInverseMapping) {
  const Quad prev = rect_to_quad({0, 0, 10, 10});
  Quad curr = prev;
  for (auto& p : curr.corners) p = p + Point2{3, 0};
  EXPECT_NEAR(reprojection_error(Homography::translation(3, 0), prev, curr), 0, 1e-12);
  EXPECT_NEAR(reprojection_error(Homography::translation(0, 0), prev, curr), 3, 1e-12);
  curr[0] = curr[0] + Point2{4, 0};
  EXPECT_NEAR(reprojection_error(Homography::translation(3, 0), prev, curr), 1, 1e-12);
}

TEST(TrackerNames, RoundTripAndRejectUnknown) {
  for (auto m : {MatcherKind::bruteforce, MatcherKind::mutual_nn, MatcherKind::fginn,
                 MatcherKind::sym_fginn_intersection, MatcherKind::sym_fginn_union, MatcherKind::gms}) {
    EXPECT_EQ(parse_matcher(to_string(m)), m);
  }
  EXPECT_EQ(parse_estimator("ransac"), EstimatorKind::ransac);
  EXPECT_EQ(parse_estimator("magsac"), EstimatorKind::magsac);
  EXPECT_EQ(code_of([] { parse_matcher("flann"); }), ErrorCode::config_error);
  EXPECT_EQ(code_of([] { parse_estimator("lmeds"); }), ErrorCode::config_error);
  TrackerParams p;
  EXPECT_EQ(p.method_tag(), "sym_fginn_intersection+ransac");
}

TEST(Motion, RecoversCameraPanOnSyntheticScene) {
  synthetic::SceneParams sp;
  sp.frames = 3;
  const synthetic::Backdrop bd(sp);
  const auto f0 = bd.frame(0), f1 = bd.frame(1);
  for (auto mk : {MatcherKind::sym_fginn_intersection, MatcherKind::sym_fginn_union, MatcherKind::gms,
                  MatcherKind::mutual_nn}) {
    for (auto ek : {EstimatorKind::ransac, EstimatorKind::magsac}) {
      TrackerParams tp;
      tp.matcher = mk;
      tp.estimator = ek;
      const auto a = extract_features(to_gray(f0.image), &f0.human, tp);
      const auto b = extract_features(to_gray(f1.image), &f1.human, tp);
      const FrameMotion m = estimate_motion(a, b, tp);
      EXPECT_GT(m.n_inliers, 50u) << tp.method_tag();
      const Quad moved = track_quad(f0.panel, m.h);
      for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(distance(moved[i], f1.panel[i]), 0.5) << tp.method_tag();
    }
  }
}

TEST(Motion, TooFewKeypoints) {
  Features f;
  f.width = f.height = 64;
  EXPECT_EQ(code_of([&] { estimate_motion(f, f, TrackerParams{}); }), ErrorCode::insufficient_matches);
}

TEST(Bench, ConfigParsingAndValidation) {
  const auto c = parse_bench_config(json::parse(R"({"synthetic":{"frames":5,"sequences":2},
    "gt_noise_trials":3,"keypoint_noise_sigma":0.25,"matchers":["gms"],"estimators":["magsac"],"seed":4})"),
                                    ".");
  EXPECT_EQ(c.scene.frames, 5);
  EXPECT_EQ(c.sequences, 2);
  EXPECT_EQ(c.gt_noise_trials, 3);
  EXPECT_DOUBLE_EQ(c.keypoint_noise_sigma, 0.25);
  ASSERT_EQ(c.matchers.size(), 1u);
  EXPECT_EQ(c.matchers[0], MatcherKind::gms);
  EXPECT_EQ(c.tracker.magsac.seed, 4u);
  for (const char* bad : {R"({"bogus":1})", R"({"gt_noise_trials":0})", R"({"gt_noise_sigma":-1})",
                          R"({"keypoint_noise_sigma":-0.1})", R"({"matchers":[]})", R"({"matchers":["x"]})",
                          R"({"synthetic":{"frames":1}})", R"({"frames_dir":"f"})", R"([1])"}) {
    EXPECT_EQ(code_of([&] { parse_bench_config(json::parse(bad), "."); }), ErrorCode::config_error) << bad;
  }
}

TEST(Bench, ExactTrackingWithoutNoise) {
  BenchConfig c = parse_bench_config(
      json::parse(R"({"synthetic":{"frames":6},"gt_noise_sigma":0,"matchers":["sym_fginn_intersection"]})"), ".");
  const auto rows = run_tracking_bench(c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.pairs, 5u);
    EXPECT_EQ(r.failures, 0u);
    ASSERT_TRUE(r.mean_reproj_error);
    EXPECT_LT(*r.mean_reproj_error, 0.05);
    EXPECT_EQ(r.to_json().at("detector"), "orb");
  }
}

TEST(Bench, NoisyTruthLandsInExpectedBand) {
  // Truth jitter of 0.5 px per coordinate on both frames gives an expected
  // corner distance of 0.5 * sqrt(2) * sqrt(pi / 2) ~= 0.886 for an exact tracker.
  BenchConfig c = parse_bench_config(json::parse(R"({"synthetic":{"frames":12},"gt_noise_sigma":0.5,
    "gt_noise_trials":200,"keypoint_noise_sigma":0.5})"),
                                     ".");
  const auto rows = run_tracking_bench(c);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.failures, 0u);
    ASSERT_TRUE(r.mean_reproj_error);
    EXPECT_GE(*r.mean_reproj_error, 0.7) << r.matcher << "+" << r.estimator;
    EXPECT_LE(*r.mean_reproj_error, 0.9) << r.matcher << "+" << r.estimator;
  }
}

TEST(Bench, SameSeedSameTable) {
  const json j = json::parse(R"({"synthetic":{"frames":4},"keypoint_noise_sigma":0.3,"seed":11})");
  const auto a = run_tracking_bench(parse_bench_config(j, "."));
  const auto b = run_tracking_bench(parse_bench_config(j, "."));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_reproj_error, b[i].mean_reproj_error);
    EXPECT_EQ(a[i].mean_inliers, b[i].mean_inliers);
  }
}
