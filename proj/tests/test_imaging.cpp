#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vpp/imaging.hpp"

using namespace vpp;

TEST(Lab, MatchesReferenceConversion) {
  struct Case {
    std::uint8_t r, g, b;
    double L, a, bb;
  };
  // Reference values from an independent sRGB/D65 implementation.
  const Case cases[] = {{119, 119, 119, 50.0344, 0.0, 0.0},
                        {200, 30, 60, 43.5630, 64.0570, 28.4723},
                        {12, 180, 240, 68.7567, -16.7954, -40.3382},
                        {255, 255, 255, 100.0, 0.0, 0.0}};
  for (const auto& c : cases) {
    const Lab lab = rgb_to_lab(c.r, c.g, c.b);
    EXPECT_NEAR(lab.L, c.L, 0.01);
    EXPECT_NEAR(lab.a, c.a, 0.01);
    EXPECT_NEAR(lab.b, c.bb, 0.01);
  }
}

TEST(Lab, BlackIsZero) {
  const Lab lab = rgb_to_lab(0, 0, 0);
  EXPECT_NEAR(lab.L, 0, 1e-9);
  EXPECT_NEAR(lab.a, 0, 1e-9);
  EXPECT_NEAR(lab.b, 0, 1e-9);
}

TEST(Lab, RoundTripIsExactForEveryCodeOnTheGrayAxisAndRandomColours) {
  for (int v = 0; v < 256; ++v) {
    const auto u = static_cast<std::uint8_t>(v);
    const Lab lab = rgb_to_lab(u, u, u);
    const auto back = lab_to_rgb(lab.L, lab.a, lab.b);
    EXPECT_EQ(back[0], u);
    EXPECT_EQ(back[1], u);
    EXPECT_EQ(back[2], u);
  }
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto r = static_cast<std::uint8_t>(rng()), g = static_cast<std::uint8_t>(rng()),
               b = static_cast<std::uint8_t>(rng());
    const Lab lab = rgb_to_lab(r, g, b);
    const auto back = lab_to_rgb(lab.L, lab.a, lab.b);
    ASSERT_EQ(back[0], r);
    ASSERT_EQ(back[1], g);
    ASSERT_EQ(back[2], b);
  }
}

TEST(Lab, BlockConversionAgreesWithScalarPath) {
  std::mt19937_64 rng(5);
  const ImageRGB img = testkit::random_image(rng, 37, 23);
  const ImageLab lab = rgb_to_lab(img);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const auto* p = img.pixel(x, y);
      const Lab ref = rgb_to_lab(p[0], p[1], p[2]);
      ASSERT_NEAR(lab.at(x, y, 0), ref.L, 2e-3);
      ASSERT_NEAR(lab.at(x, y, 1), ref.a, 5e-3);
      ASSERT_NEAR(lab.at(x, y, 2), ref.b, 5e-3);
    }
  EXPECT_EQ(lab_to_rgb(lab), img);
}

TEST(Lab, OutOfGamutClamps) {
  const auto rgb = lab_to_rgb(150.0, 0.0, 0.0);
  EXPECT_EQ(rgb[0], 255);
  const auto neg = lab_to_rgb(-20.0, 0.0, 0.0);
  EXPECT_EQ(neg[0], 0);
}

TEST(Gray, UsesRoundedLuma) {
  ImageRGB img(2, 1);
  img.at(0, 0, 0) = 200;
  img.at(0, 0, 1) = 30;
  img.at(0, 0, 2) = 60;
  img.at(1, 0, 0) = img.at(1, 0, 1) = img.at(1, 0, 2) = 77;
  const ImageGray g = to_gray(img);
  EXPECT_EQ(g.at(0, 0), 84);  // 0.299*200 + 0.587*30 + 0.114*60 = 84.35
  EXPECT_EQ(g.at(1, 0), 77);
  EXPECT_EQ(to_gray(gray_to_rgb(g)), g);
}

TEST(Image, RejectsBadDimensions) {
  EXPECT_THROW(ImageRGB(-1, 3), Error);
  EXPECT_THROW(ImageGray(2, 2, std::vector<std::uint8_t>(3)), Error);
}

TEST(Cdf, IsMonotoneAndEndsAtOne) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const ImageRGB img = testkit::random_image(rng, 1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40));
    const Cdf c = compute_cdf(to_gray(img));
    for (int k = 1; k < 256; ++k) ASSERT_GE(c.values[k], c.values[k - 1]);
    ASSERT_DOUBLE_EQ(c.values[255], 1.0);
  }
  EXPECT_THROW(compute_cdf(ImageGray()), Error);
}

TEST(Cdf, SmallExample) {
  ImageGray g(4, 1);
  g.at(0, 0) = 0;
  g.at(1, 0) = 0;
  g.at(2, 0) = 10;
  g.at(3, 0) = 255;
  const Cdf c = compute_cdf(g);
  EXPECT_DOUBLE_EQ(c.values[0], 0.5);
  EXPECT_DOUBLE_EQ(c.values[9], 0.5);
  EXPECT_DOUBLE_EQ(c.values[10], 0.75);
  EXPECT_DOUBLE_EQ(c.values[254], 0.75);
}

namespace {

BinaryMask dilate_oracle(const BinaryMask& m, int r) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool any = false;
      for (int dy = -r; dy <= r && !any; ++dy)
        for (int dx = -r; dx <= r && !any; ++dx) any = m.test(x + dx, y + dy);
      out.set(x, y, any);
    }
  return out;
}

}  // namespace

TEST(Dilate, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + static_cast<int>(rng() % 30), h = 1 + static_cast<int>(rng() % 30);
    const int r = static_cast<int>(rng() % 5);
    const BinaryMask m = testkit::random_mask(rng, w, h, 0.05);
    ASSERT_EQ(dilate(m, r), dilate_oracle(m, r)) << "w=" << w << " h=" << h << " r=" << r;
  }
  EXPECT_THROW(dilate(BinaryMask(3, 3), -1), Error);
}

TEST(Dilate, IsMonotoneInRadius) {
  std::mt19937_64 rng(19);
  const BinaryMask m = testkit::random_mask(rng, 40, 30, 0.02);
  for (int r = 0; r < 6; ++r) {
    const BinaryMask a = dilate(m, r), b = dilate(m, r + 1);
    for (std::size_t i = 0; i < a.bits().size(); ++i) ASSERT_LE(a.bits()[i], b.bits()[i]);
  }
}

TEST(BinaryMask, OutOfRangeTestIsFalse) {
  BinaryMask m(3, 3, true);
  EXPECT_TRUE(m.test(1, 1));
  EXPECT_FALSE(m.test(-1, 0));
  EXPECT_FALSE(m.test(3, 0));
  EXPECT_EQ(m.count(), 9u);
}
