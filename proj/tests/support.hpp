#pragma once

// Generators and oracles shared by the unit and acceptance tests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"
#include "vpp/synthetic.hpp"

namespace vpp::testkit {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("vpp_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * synthetic::uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return synthetic::detail::uniform(rng, lo, hi); }

inline ImageRGB random_image(std::mt19937_64& rng, int w, int h) {
  ImageRGB img(w, h);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

/// Smooth-ish image: random blocks over a gradient, so LAB stats are not flat.
inline ImageRGB blocky_image(std::mt19937_64& rng, int w, int h) {
  ImageRGB img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = static_cast<std::uint8_t>((x * 255) / std::max(1, w - 1));
      p[1] = static_cast<std::uint8_t>((y * 255) / std::max(1, h - 1));
      p[2] = static_cast<std::uint8_t>(((x + y) * 3) & 0xff);
    }
  for (int i = 0; i < 40; ++i) {
    const std::uint8_t c[3] = {static_cast<std::uint8_t>(rng() & 0xff), static_cast<std::uint8_t>(rng() & 0xff),
                               static_cast<std::uint8_t>(rng() & 0xff)};
    synthetic::detail::fill_rect(img, uniform_int(rng, 0, w - 1), uniform_int(rng, 0, h - 1),
                                 uniform_int(rng, 2, std::max(2, w / 3)), uniform_int(rng, 2, std::max(2, h / 3)), c);
  }
  return img;
}

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, synthetic::uniform01(rng) < density);
  return m;
}

/// Convex quad near a random centre, corners in TL, TR, BR, BL order.
inline Quad random_convex_quad(std::mt19937_64& rng, double cx, double cy, double half, double jitter) {
  const Point2 base[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (;;) {
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
      q[i] = {cx + half * base[i].x + uniform(rng, -jitter, jitter),
              cy + half * base[i].y + uniform(rng, -jitter, jitter)};
    }
    if (is_simple(q) && !has_collinear_triple(q.corners, 1e-3)) return q;
  }
}

/// Correspondences under a random homography: inliers carry Gaussian noise
/// on the destination, outliers are uniform over the frame.
struct HomographyScene {
  Homography truth;
  std::vector<Point2> src, dst;
  std::vector<bool> inlier;
};

inline HomographyScene homography_scene(std::mt19937_64& rng, std::size_t n = 100, double sigma = 0.5,
                                        double outlier_ratio = 0.3, double w = 640, double h = 480) {
  HomographyScene s;
  const Quad frame{{Point2{0, 0}, Point2{w, 0}, Point2{w, h}, Point2{0, h}}};
  Quad moved = frame;
  for (auto& p : moved.corners) p = p + Point2{uniform(rng, -60, 60), uniform(rng, -60, 60)};
  s.truth = homography_from_quads(frame, moved);
  const auto n_out = static_cast<std::size_t>(std::lround(outlier_ratio * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p{uniform(rng, 0, w), uniform(rng, 0, h)};
    const bool in = i >= n_out;
    Point2 q = apply_homography(s.truth, p);
    if (in) {
      q = q + Point2{sigma * synthetic::gaussian(rng), sigma * synthetic::gaussian(rng)};
    } else {
      q = {uniform(rng, 0, w), uniform(rng, 0, h)};
    }
    s.src.push_back(p);
    s.dst.push_back(q);
    s.inlier.push_back(in);
  }
  return s;
}

/// Component labels from a recursive-free 8-connected flood fill, numbered in
/// scan order of each component's first pixel. Background is -1.
inline std::vector<int> flood_fill_labels(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.get(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      std::vector<std::array<int, 2>> stack{{x, y}};
      label[static_cast<std::size_t>(y) * w + x] = next;
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (!m.test(nx, ny)) continue;
            auto& l = label[static_cast<std::size_t>(ny) * w + nx];
            if (l < 0) {
              l = next;
              stack.push_back({nx, ny});
            }
          }
      }
      ++next;
    }
  }
  return label;
}

/// Canonical partition: each set of pixel indices, keyed by its first pixel.
inline std::vector<std::vector<int>> partition_from_labels(const std::vector<int>& label) {
  std::vector<std::vector<int>> parts;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] < 0) continue;
    if (static_cast<std::size_t>(label[i]) >= parts.size()) parts.resize(static_cast<std::size_t>(label[i]) + 1);
    parts[static_cast<std::size_t>(label[i])].push_back(static_cast<int>(i));
  }
  return parts;
}

inline double max_abs_diff(const ImageRGB& a, const ImageRGB& b) {
  int m = 0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(int(da[i]) - int(db[i])));
  return m;
}

/// Ad whose per-channel histogram is as flat as 8 bits allow.
inline ImageRGB equalized_image(int w, int h) {
  ImageRGB img(w, h);
  std::size_t i = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x, ++i) {
      auto* p = img.pixel(x, y);
      p[0] = static_cast<std::uint8_t>(i % 256);
      p[1] = static_cast<std::uint8_t>((i * 7) % 256);
      p[2] = static_cast<std::uint8_t>((i * 13) % 256);
    }
  return img;
}

/// Sup-distance between the per-channel CDFs of two images.
inline double cdf_sup_distance(const ImageRGB& a, const ImageRGB& b, int channel) {
  const Cdf ca = cdf_from_histogram(channel_histogram(a, channel));
  const Cdf cb = cdf_from_histogram(channel_histogram(b, channel));
  double d = 0;
  for (int k = 0; k < 256; ++k) d = std::max(d, std::abs(ca.values[k] - cb.values[k]));
  return d;
}

}  // namespace vpp::testkit
