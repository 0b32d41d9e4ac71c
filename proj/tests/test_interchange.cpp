#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "vpp/interchange.hpp"

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

TEST(Lines, RoundTripAndSkipZeroLength) {
  const LineSegmentSet in{{{0, 0}, {10, 0}}, {{3.5, 1}, {3.5, 9.25}}};
  const auto out = lines_from_json(json::parse(lines_to_json(in).dump()));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].p2, (Point2{3.5, 9.25}));
  const auto j = json::parse(R"({"segments":[[1,1,1,1],[0,0,5,5]]})");
  EXPECT_EQ(lines_from_json(j).size(), 1u);
  EXPECT_EQ(code_of([] { lines_from_json(json::parse(R"({"segments":[[1,2,3]]})")); }), ErrorCode::format_error);
  EXPECT_EQ(code_of([] { lines_from_json(json::parse(R"({"lines":[]})")); }), ErrorCode::format_error);
  EXPECT_EQ(code_of([] { lines_from_json(json::parse(R"({"segments":[["a",0,1,1]]})")); }), ErrorCode::format_error);
}

TEST(Detections, RoundTripClippingAndScoreRange) {
  const std::vector<Detection> in{{"person", 0.9, {10, 20, 30, 40}}, {"cup", 0.5, {-5, 90, 20, 20}}};
  const auto rt = detections_from_json(json::parse(detections_to_json(in).dump()));
  ASSERT_EQ(rt.size(), 2u);
  EXPECT_EQ(rt[0].label, "person");
  EXPECT_EQ(rt[1].bbox, (std::array<double, 4>{-5, 90, 20, 20}));
  const auto clipped = detections_from_json(detections_to_json(in), 100, 100);
  EXPECT_EQ(clipped[0].bbox, (std::array<double, 4>{10, 20, 30, 40}));
  EXPECT_EQ(clipped[1].bbox, (std::array<double, 4>{0, 90, 15, 10}));
  for (const char* bad : {R"({"detections":[{"label":"a","score":1.5,"bbox":[0,0,1,1]}]})",
                          R"({"detections":[{"label":"a","score":-0.1,"bbox":[0,0,1,1]}]})",
                          R"({"detections":[{"label":"a","score":0.5,"bbox":[0,0,1]}]})",
                          R"({"detections":[{"score":0.5,"bbox":[0,0,1,1]}]})", R"({})"}) {
    EXPECT_EQ(code_of([&] { detections_from_json(json::parse(bad)); }), ErrorCode::format_error) << bad;
  }
}

TEST(Regions, RoundTripWithAndWithoutQuad) {
  RegionProposal r{{4, 5, 60, 30}, 1500, std::nullopt};
  auto back = region_from_json(json::parse(region_to_json(r).dump()));
  EXPECT_EQ(back.bbox, r.bbox);
  EXPECT_EQ(back.blob_area, 1500);
  EXPECT_FALSE(back.aligned);
  r.aligned = Quad{{Point2{4, 5}, Point2{63.5, 6}, Point2{63, 34}, Point2{4, 34}}};
  back = region_from_json(region_to_json(r));
  ASSERT_TRUE(back.aligned);
  EXPECT_EQ(back.aligned->corners, r.aligned->corners);
  EXPECT_EQ(code_of([] { region_from_json(json::parse(R"({"bbox":[0,0,1,1],"area":1,"quad":[[0,0]]})")); }),
            ErrorCode::format_error);
}

TEST(Descriptors, HexLayoutIsLowBitFirstPerByte) {
  BinaryDescriptor d{};
  d[0] = 0x01;                         // bit 0 -> byte 0 = 0x01
  d[0] |= std::uint64_t{0xab} << 8;    // byte 1
  d[3] = std::uint64_t{0x80} << 56;    // bit 255 -> byte 31 = 0x80
  const std::string hex = descriptor_to_hex(d);
  ASSERT_EQ(hex.size(), 64u);
  EXPECT_EQ(hex.substr(0, 4), "01ab");
  EXPECT_EQ(hex.substr(62), "80");
  EXPECT_EQ(descriptor_from_hex(hex), d);
  std::string upper = hex;
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  EXPECT_EQ(descriptor_from_hex(upper), d);
  EXPECT_EQ(code_of([] { descriptor_from_hex("00"); }), ErrorCode::format_error);
  EXPECT_EQ(code_of([] { descriptor_from_hex(std::string(63, '0') + "g"); }), ErrorCode::format_error);
}

TEST(Descriptors, RandomRoundTripProperty) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 1000; ++i) {
    const BinaryDescriptor d{rng(), rng(), rng(), rng()};
    ASSERT_EQ(descriptor_from_hex(descriptor_to_hex(d)), d);
  }
}

TEST(FeaturesJson, RoundTripAndCountCheck) {
  Features f;
  f.width = 64;
  f.height = 48;
  f.keypoints = {{{10.5, 12}, 30.f, 0.25f}, {{20, 30}, 12.f, -1.5f}};
  f.descriptors = {{1, 2, 3, 4}, {~0ull, 0, 0, 7}};
  const Features g = features_from_json(json::parse(features_to_json(f).dump()), 64, 48);
  EXPECT_EQ(g.width, 64);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g.keypoints[0].pt, f.keypoints[0].pt);
  EXPECT_FLOAT_EQ(g.keypoints[1].angle, -1.5f);
  EXPECT_EQ(g.descriptors, f.descriptors);
  json bad = features_to_json(f);
  bad["descriptors"].erase(1);
  EXPECT_EQ(code_of([&] { features_from_json(bad, 64, 48); }), ErrorCode::format_error);
}

TEST(Trace, RoundTrip) {
  TraceRecord r{3, rect_to_quad({1, 2, 3, 4}), 120, 97, 0.42, "gms+magsac"};
  const TraceRecord b = trace_from_json(json::parse(trace_to_json(r).dump()));
  EXPECT_EQ(b.frame, 3);
  EXPECT_EQ(b.quad->corners, r.quad->corners);
  EXPECT_EQ(b.n_inliers, 97u);
  EXPECT_EQ(b.reproj_error, 0.42);
  EXPECT_EQ(b.method, "gms+magsac");
  const TraceRecord empty = trace_from_json(trace_to_json(TraceRecord{}));
  EXPECT_FALSE(empty.quad);
  EXPECT_FALSE(empty.reproj_error);
}

TEST(JsonFiles, Errors) {
  testkit::TempDir dir("json");
  EXPECT_EQ(code_of([&] { read_json_file(dir.path() / "missing.json"); }), ErrorCode::io_error);
  write_text_file(dir.path() / "bad.json", "{not json");
  EXPECT_EQ(code_of([&] { read_json_file(dir.path() / "bad.json"); }), ErrorCode::format_error);
  write_text_file(dir.path() / "ok.json", R"({"segments":[[0,0,1,0]]})");
  EXPECT_EQ(load_lines(dir.path() / "ok.json").size(), 1u);
  EXPECT_EQ(code_of([&] { write_text_file(dir.path() / "no" / "such" / "x.json", "{}"); }), ErrorCode::io_error);
}
