#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vpp/line_detection.hpp"

using namespace vpp;

namespace {

ImageGray rectangle_image(int w, int h, Rect r, std::uint8_t bg, std::uint8_t fg) {
  ImageGray img(w, h, bg);
  for (int y = r.y; y < r.y + r.h; ++y)
    for (int x = r.x; x < r.x + r.w; ++x) img.at(x, y) = fg;
  return img;
}

}  // namespace

TEST(Canny, FlatImageHasNoEdges) {
  EXPECT_EQ(canny(ImageGray(40, 30, 128), 50, 150).count(), 0u);
}

TEST(Canny, StepEdgeIsOnePixelThick) {
  ImageGray img(40, 30, 20);
  for (int y = 0; y < 30; ++y)
    for (int x = 20; x < 40; ++x) img.at(x, y) = 220;
  const BinaryMask e = canny(img, 50, 150);
  for (int y = 2; y < 28; ++y) {
    int n = 0;
    for (int x = 0; x < 40; ++x) n += e.get(x, y);
    ASSERT_EQ(n, 1) << "row " << y;
    ASSERT_TRUE(e.get(19, y) || e.get(20, y));
  }
}

TEST(Canny, WeakEdgesSurviveOnlyWhenConnected) {
  // Left half of a vertical edge is strong, the right part weak but connected.
  ImageGray img(60, 20, 100);
  for (int y = 0; y < 20; ++y)
    for (int x = 30; x < 60; ++x) img.at(x, y) = y < 10 ? 250 : 130;
  const BinaryMask connected = canny(img, 50, 300);
  // An isolated weak edge with no strong seed disappears.
  ImageGray weak(60, 20, 100);
  for (int y = 0; y < 20; ++y)
    for (int x = 30; x < 60; ++x) weak.at(x, y) = 130;
  EXPECT_EQ(canny(weak, 50, 300).count(), 0u);
  int lower = 0;
  for (int y = 11; y < 18; ++y)
    for (int x = 0; x < 60; ++x) lower += connected.get(x, y);
  EXPECT_GT(lower, 0);
}

TEST(Hough, FindsRectangleSides) {
  const Rect r{40, 30, 120, 80};
  const ImageGray img = rectangle_image(200, 140, r, 30, 220);
  LineDetectionParams p;
  p.min_len = 40;
  const auto segs = detect_line_segments(img, p);
  int horizontal = 0, vertical = 0;
  for (const auto& s : segs) {
    EXPECT_GE(s.length(), p.min_len);
    if (s.orientation == Orientation::horizontal) {
      ++horizontal;
      const double y = s.midpoint().y;
      EXPECT_TRUE(std::abs(y - r.y) <= 1.5 || std::abs(y - (r.y + r.h - 1)) <= 1.5) << y;
    } else if (s.orientation == Orientation::vertical) {
      ++vertical;
      const double x = s.midpoint().x;
      EXPECT_TRUE(std::abs(x - r.x) <= 1.5 || std::abs(x - (r.x + r.w - 1)) <= 1.5) << x;
    }
  }
  EXPECT_GE(horizontal, 2);
  EXPECT_GE(vertical, 2);
}

TEST(Hough, SameSeedSameSegments) {
  std::mt19937_64 rng(8);
  const ImageGray img = to_gray(testkit::blocky_image(rng, 160, 120));
  LineDetectionParams p;
  p.seed = 42;
  const auto a = detect_line_segments(img, p);
  const auto b = detect_line_segments(img, p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].p1, b[i].p1);
    EXPECT_EQ(a[i].p2, b[i].p2);
  }
}

TEST(Hough, RejectsTinyImages) {
  try {
    detect_line_segments(ImageGray(10, 40));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::image_too_small);
  }
}
