#pragma once

// Classical line-segment detection: Canny edges followed by the progressive
// probabilistic Hough transform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

struct LineDetectionParams {
  double canny_lo = 50;
  double canny_hi = 150;
  int hough_threshold = 40;
  double min_len = 30;
  int max_gap = 5;
  std::uint64_t seed = 0;
  /// Tolerance used to tag each output segment's orientation.
  double angle_tol_deg = 10;
};

/// Canny edge map from 3x3 Sobel gradients (L2 magnitude), 4-direction
/// non-maximum suppression and 8-connected hysteresis.
inline BinaryMask canny(const ImageGray& img, double lo, double hi) {
  const int w = img.width(), h = img.height();
  std::vector<float> mag(static_cast<std::size_t>(w) * h, 0.f);
  std::vector<std::uint8_t> dir(mag.size(), 0);
  auto px = [&](int x, int y) { return static_cast<int>(img.at(x, y)); };

  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const int gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const int gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      mag[i] = std::sqrt(static_cast<float>(gx * gx + gy * gy));
      // 0: horizontal gradient, 1: 45 deg, 2: vertical, 3: 135 deg.
      const double ang = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      const double a = ang < 0 ? ang + 180.0 : ang;
      dir[i] = a < 22.5 || a >= 157.5 ? 0 : a < 67.5 ? 1 : a < 112.5 ? 2 : 3;
    }
  }

  static constexpr int offs[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  // 0 = none, 1 = weak, 2 = strong
  std::vector<std::uint8_t> cls(mag.size(), 0);
  std::vector<int> stack;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float m = mag[i];
      if (m <= lo) continue;
      const auto [dx, dy] = offs[dir[i]];
      const float m1 = mag[static_cast<std::size_t>(y + dy) * w + (x + dx)];
      const float m2 = mag[static_cast<std::size_t>(y - dy) * w + (x - dx)];
      // Asymmetric comparison keeps exactly one pixel across plateaus.
      if (!(m > m1 && m >= m2)) continue;
      if (m > hi) {
        cls[i] = 2;
        stack.push_back(static_cast<int>(i));
      } else {
        cls[i] = 1;
      }
    }
  }
  BinaryMask edges(w, h);
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    const int x = i % w, y = i / w;
    edges.set(x, y);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (!edges.contains(nx, ny)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (cls[j] == 1) {
          cls[j] = 2;
          stack.push_back(static_cast<int>(j));
        }
      }
    }
  }
  return edges;
}

/// Progressive probabilistic Hough transform over an edge map. Points are
/// visited in an order shuffled by `seed`.
inline LineSegmentSet hough_segments(const BinaryMask& edges, int threshold, double min_len,
                                     int max_gap, std::uint64_t seed) {
  const int w = edges.width(), h = edges.height();
  constexpr int num_angle = 180;
  const int num_rho = 2 * (w + h) + 1;
  const int rho_off = (num_rho - 1) / 2;

  std::vector<double> cos_t(num_angle), sin_t(num_angle);
  for (int n = 0; n < num_angle; ++n) {
    const double t = n * std::numbers::pi / num_angle;
    cos_t[n] = std::cos(t);
    sin_t[n] = std::sin(t);
  }

  std::vector<int> acc(static_cast<std::size_t>(num_angle) * num_rho, 0);
  BinaryMask mask = edges;
  std::vector<std::uint8_t> voted(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::pair<int, int>> points;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (edges.get(x, y)) points.emplace_back(x, y);

  std::mt19937_64 rng(seed);
  for (std::size_t i = points.size(); i > 1; --i) {
    std::swap(points[i - 1], points[rng() % i]);
  }

  auto rho_bin = [&](int x, int y, int n) {
    return static_cast<int>(std::lround(x * cos_t[n] + y * sin_t[n])) + rho_off;
  };

  LineSegmentSet out;
  for (const auto& [x0, y0] : points) {
    if (!mask.get(x0, y0)) continue;
    int best_val = threshold - 1;
    int best_n = 0;
    voted[static_cast<std::size_t>(y0) * w + x0] = 1;
    for (int n = 0; n < num_angle; ++n) {
      int& a = acc[static_cast<std::size_t>(n) * num_rho + rho_bin(x0, y0, n)];
      ++a;
      if (a > best_val) {
        best_val = a;
        best_n = n;
      }
    }
    if (best_val < threshold) continue;

    // Direction along the line (normal is (cos, sin)).
    const double ldx = -sin_t[best_n], ldy = cos_t[best_n];
    const bool x_major = std::abs(ldx) > std::abs(ldy);
    const double sx = x_major ? (ldx > 0 ? 1.0 : -1.0) : ldx / std::abs(ldy);
    const double sy = x_major ? ldy / std::abs(ldx) : (ldy > 0 ? 1.0 : -1.0);

    std::array<std::pair<int, int>, 2> ends{{{x0, y0}, {x0, y0}}};
    std::array<int, 2> end_step{0, 0};
    for (int k = 0; k < 2; ++k) {
      const double dx = k == 0 ? sx : -sx, dy = k == 0 ? sy : -sy;
      int gap = 0;
      for (int step = 1;; ++step) {
        const int x = static_cast<int>(std::lround(x0 + dx * step));
        const int y = static_cast<int>(std::lround(y0 + dy * step));
        if (!mask.contains(x, y)) break;
        if (mask.get(x, y)) {
          gap = 0;
          ends[k] = {x, y};
          end_step[k] = step;
        } else if (++gap > max_gap) {
          break;
        }
      }
    }
    const double len = std::hypot(ends[1].first - ends[0].first, ends[1].second - ends[0].second);
    const bool good = len >= min_len;

    // Remove the walked points; un-vote the ones that already voted.
    for (int k = 0; k < 2; ++k) {
      const double dx = k == 0 ? sx : -sx, dy = k == 0 ? sy : -sy;
      for (int step = k == 0 ? 0 : 1; step <= end_step[k]; ++step) {
        const int x = static_cast<int>(std::lround(x0 + dx * step));
        const int y = static_cast<int>(std::lround(y0 + dy * step));
        if (mask.get(x, y)) {
          const std::size_t idx = static_cast<std::size_t>(y) * w + x;
          if (good && voted[idx]) {
            for (int n = 0; n < num_angle; ++n) {
              --acc[static_cast<std::size_t>(n) * num_rho + rho_bin(x, y, n)];
            }
            voted[idx] = 0;
          }
          mask.set(x, y, false);
        }
      }
    }
    if (good) {
      LineSegment seg;
      seg.p1 = {static_cast<double>(ends[1].first), static_cast<double>(ends[1].second)};
      seg.p2 = {static_cast<double>(ends[0].first), static_cast<double>(ends[0].second)};
      out.push_back(seg);
    }
  }
  return out;
}

/// Segments of length >= params.min_len, each tagged with its orientation.
inline LineSegmentSet detect_line_segments(const ImageGray& img,
                                           const LineDetectionParams& params = {}) {
  if (img.width() < 16 || img.height() < 16) {
    throw Error(ErrorCode::image_too_small, "line detection needs at least 16x16 pixels");
  }
  const BinaryMask edges = canny(img, params.canny_lo, params.canny_hi);
  LineSegmentSet segs =
      hough_segments(edges, params.hough_threshold, params.min_len, params.max_gap, params.seed);
  for (auto& s : segs) s.orientation = classify_line(s, params.angle_tol_deg);
  return segs;
}

}  // namespace vpp
