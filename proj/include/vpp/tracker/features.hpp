#pragma once

// Single-scale ORB-style features: FAST-9 corners with intensity-centroid
// orientation, described by a steered 256-bit BRIEF.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

struct Keypoint {
  Point2 pt;
  float response = 0;
  /// Radians, from the intensity centroid.
  float angle = 0;
};

using BinaryDescriptor = std::array<std::uint64_t, 4>;

inline int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  return std::popcount(a[0] ^ b[0]) + std::popcount(a[1] ^ b[1]) + std::popcount(a[2] ^ b[2]) +
         std::popcount(a[3] ^ b[3]);
}

inline bool descriptor_bit(const BinaryDescriptor& d, int i) {
  return (d[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
}

/// Keypoints with their descriptors, tied to the frame they came from.
struct Features {
  int width = 0;
  int height = 0;
  std::vector<Keypoint> keypoints;
  std::vector<BinaryDescriptor> descriptors;
  /// Keypoints dropped by the descriptor's border rule.
  std::size_t dropped = 0;

  std::size_t size() const { return keypoints.size(); }
};

struct FastParams {
  int threshold = 20;
  int max_keypoints = 1000;
  int nms_radius = 3;
};

namespace detail {

// Bresenham circle of radius 3, clockwise from the top.
inline constexpr std::array<std::array<int, 2>, 16> kFastCircle{{{0, -3}, {1, -3}, {2, -2}, {3, -1},
                                                                  {3, 0}, {3, 1}, {2, 2}, {1, 3},
                                                                  {0, 3}, {-1, 3}, {-2, 2}, {-3, 1},
                                                                  {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

inline constexpr int kOrientRadius = 15;
inline constexpr int kDetectBorder = kOrientRadius + 1;
inline constexpr int kDescribeBorder = 20;

/// Sum of (|I(p) - I(c)| - t) over the arc pixels, or 0 if no run of 9
/// contiguous circle pixels is uniformly brighter or darker than the centre.
inline float fast_score(const ImageGray& img, int x, int y, int t) {
  const int c = img.at(x, y);
  int v[16];
  for (int i = 0; i < 16; ++i) v[i] = img.at(x + kFastCircle[i][0], y + kFastCircle[i][1]) - c;

  // Any arc of 9 contains at least two of the four compass points.
  int bright = 0, dark = 0;
  for (int i : {0, 4, 8, 12}) {
    bright += v[i] > t;
    dark += v[i] < -t;
  }
  if (bright < 2 && dark < 2) return 0;

  auto has_run = [&](auto pred) {
    int run = 0;
    for (int i = 0; i < 16 + 8; ++i) {
      if (pred(v[i & 15])) {
        if (++run >= 9) return true;
      } else {
        run = 0;
      }
    }
    return false;
  };
  const bool is_bright = bright >= 2 && has_run([t](int d) { return d > t; });
  const bool is_dark = !is_bright && dark >= 2 && has_run([t](int d) { return d < -t; });
  if (!is_bright && !is_dark) return 0;
  int score = 0;
  for (int d : v) {
    if (is_bright && d > t) score += d - t;
    if (is_dark && d < -t) score += -d - t;
  }
  return static_cast<float>(score);
}

inline std::array<int, kOrientRadius + 1> circle_extent() {
  std::array<int, kOrientRadius + 1> umax{};
  for (int v = 0; v <= kOrientRadius; ++v) {
    umax[v] = static_cast<int>(std::floor(std::sqrt(kOrientRadius * kOrientRadius - v * v + 0.5)));
  }
  return umax;
}

inline float intensity_centroid_angle(const ImageGray& img, int x, int y) {
  static const auto umax = circle_extent();
  long m01 = 0, m10 = 0;
  for (int v = -kOrientRadius; v <= kOrientRadius; ++v) {
    const int d = umax[std::abs(v)];
    for (int u = -d; u <= d; ++u) {
      const int i = img.at(x + u, y + v);
      m10 += static_cast<long>(u) * i;
      m01 += static_cast<long>(v) * i;
    }
  }
  return static_cast<float>(std::atan2(static_cast<double>(m01), static_cast<double>(m10)));
}

}  // namespace detail

/// FAST-9 corners after non-maximum suppression, strongest first (ties in
/// scan order), capped at max_keypoints.
inline std::vector<Keypoint> detect_keypoints(const ImageGray& img, const FastParams& params = {}) {
  if (img.width() < 32 || img.height() < 32) {
    throw Error(ErrorCode::image_too_small, "keypoint detection needs at least 32x32 pixels");
  }
  const int w = img.width(), h = img.height();
  const int b = detail::kDetectBorder;
  std::vector<float> score(static_cast<std::size_t>(w) * h, 0.f);
  for (int y = b; y < h - b; ++y)
    for (int x = b; x < w - b; ++x)
      score[static_cast<std::size_t>(y) * w + x] = detail::fast_score(img, x, y, params.threshold);

  const int r = std::max(0, params.nms_radius);
  std::vector<Keypoint> kps;
  for (int y = b; y < h - b; ++y) {
    for (int x = b; x < w - b; ++x) {
      const float s = score[static_cast<std::size_t>(y) * w + x];
      if (s <= 0) continue;
      bool is_max = true;
      for (int dy = -r; dy <= r && is_max; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const float n = score[static_cast<std::size_t>(ny) * w + nx];
          // Equal neighbours earlier in scan order win.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > s || (n == s && earlier)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) kps.push_back({{static_cast<double>(x), static_cast<double>(y)}, s, 0.f});
    }
  }
  // kps is in scan order, so a stable sort keeps that as the tie-break.
  std::stable_sort(kps.begin(), kps.end(),
                   [](const Keypoint& a, const Keypoint& b) { return a.response > b.response; });
  if (params.max_keypoints >= 0 && kps.size() > static_cast<std::size_t>(params.max_keypoints)) {
    kps.resize(static_cast<std::size_t>(params.max_keypoints));
  }
  for (auto& k : kps) {
    k.angle = detail::intensity_centroid_angle(img, static_cast<int>(k.pt.x), static_cast<int>(k.pt.y));
  }
  return kps;
}

namespace detail {

struct BriefPair {
  std::int8_t x1, y1, x2, y2;
};

/// 256 point pairs inside [-13,13]^2, roughly Gaussian around the centre.
/// Generated with integer-only arithmetic from a fixed seed, so the pattern
/// is identical on every platform.
inline const std::array<BriefPair, 256>& brief_pattern() {
  static const std::array<BriefPair, 256> pattern = [] {
    std::uint64_t state = 0x5eed0bb1e5ULL;
    auto next = [&state]() {
      std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      return z ^ (z >> 31);
    };
    // Irwin-Hall sum of four 10-bit uniforms: mean 2046, std ~591;
    // rescaled to std ~6.2 px and clipped to the 13 px half-window.
    auto coord = [&]() {
      long s = 0;
      for (int i = 0; i < 4; ++i) s += static_cast<long>(next() & 1023);
      long v = (s - 2046) * 62;
      v = v >= 0 ? (v + 2955) / 5910 : -((-v + 2955) / 5910);
      return static_cast<std::int8_t>(std::clamp(v, -13L, 13L));
    };
    std::array<BriefPair, 256> p{};
    for (auto& pair : p) {
      do {
        pair = {coord(), coord(), coord(), coord()};
      } while (pair.x1 == pair.x2 && pair.y1 == pair.y2);
    }
    return p;
  }();
  return pattern;
}

/// Separable Gaussian (sigma 2, 7 taps) with replicated borders.
inline ImageGray smooth_for_brief(const ImageGray& img) {
  static constexpr std::array<float, 7> k = [] {
    std::array<float, 7> kk{};
    // exp(-i^2 / 8) for i = -3..3, normalized.
    const double raw[7] = {0.32465246735834974, 0.6065306597126334, 0.8824969025845955, 1.0,
                           0.8824969025845955,  0.6065306597126334, 0.32465246735834974};
    double s = 0;
    for (double r : raw) s += r;
    for (int i = 0; i < 7; ++i) kk[i] = static_cast<float>(raw[i] / s);
    return kk;
  }();
  const int w = img.width(), h = img.height();
  std::vector<float> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -3; i <= 3; ++i) acc += k[i + 3] * img.at(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  ImageGray out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -3; i <= 3; ++i) {
        acc += k[i + 3] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out.at(x, y) = static_cast<std::uint8_t>(std::min(255.f, acc + 0.5f));
    }
  }
  return out;
}

inline BinaryDescriptor brief_descriptor(const ImageGray& smoothed, const Keypoint& kp) {
  const auto& pattern = brief_pattern();
  const double c = std::cos(kp.angle), s = std::sin(kp.angle);
  const int cx = static_cast<int>(std::lround(kp.pt.x)), cy = static_cast<int>(std::lround(kp.pt.y));
  auto sample = [&](int px, int py) {
    const int rx = static_cast<int>(std::lround(c * px - s * py));
    const int ry = static_cast<int>(std::lround(s * px + c * py));
    return smoothed.at(cx + rx, cy + ry);
  };
  BinaryDescriptor d{};
  for (int i = 0; i < 256; ++i) {
    const auto& p = pattern[i];
    if (sample(p.x1, p.y1) < sample(p.x2, p.y2)) d[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  return d;
}

}  // namespace detail

/// Steered BRIEF descriptors. Keypoints closer than 20 px to the border are
/// dropped and counted in `dropped`.
inline Features describe(const ImageGray& img, std::span<const Keypoint> kps) {
  Features out;
  out.width = img.width();
  out.height = img.height();
  const ImageGray smoothed = detail::smooth_for_brief(img);
  const int b = detail::kDescribeBorder;
  for (const auto& k : kps) {
    const long x = std::lround(k.pt.x), y = std::lround(k.pt.y);
    if (x < b || y < b || x >= img.width() - b || y >= img.height() - b) {
      ++out.dropped;
      continue;
    }
    out.keypoints.push_back(k);
    out.descriptors.push_back(detail::brief_descriptor(smoothed, k));
  }
  return out;
}

/// Drops keypoints that fall inside the human mask grown by `margin` pixels.
inline Features filter_keypoints_by_mask(const Features& f, const BinaryMask& human_mask,
                                         int margin) {
  if (!human_mask.same_size(f.width, f.height)) {
    throw Error(ErrorCode::dimension_mismatch, "human mask does not match the frame");
  }
  if (f.keypoints.size() != f.descriptors.size()) {
    throw Error(ErrorCode::length_mismatch, "keypoints and descriptors are not paired");
  }
  const BinaryMask zone = dilate(human_mask, margin);
  Features out;
  out.width = f.width;
  out.height = f.height;
  out.dropped = f.dropped;
  for (std::size_t i = 0; i < f.keypoints.size(); ++i) {
    const auto& p = f.keypoints[i].pt;
    if (zone.test(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)))) continue;
    out.keypoints.push_back(f.keypoints[i]);
    out.descriptors.push_back(f.descriptors[i]);
  }
  return out;
}

}  // namespace vpp
