#pragma once

// Deterministic synthetic "kitchen" scenes: a textured backdrop with a flat
// wall panel, viewed through a window that slides by whole pixels per frame.
// Used by the tests, the acceptance suite and `vpp synth`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"
#include "vpp/scene.hpp"

namespace vpp::synthetic {

struct SceneParams {
  int frame_w = 512;
  int frame_h = 288;
  int frames = 30;
  /// Camera motion per frame, in whole pixels.
  int dx = 2;
  int dy = 0;
  std::uint64_t seed = 7;
  int clutter = 420;
  /// Draw a person that walks across the wall panel.
  bool with_person = true;
  /// Emit kitchen-scene detections (person + cup).
  bool kitchen = true;
};

struct Frame {
  ImageRGB image;
  BinaryMask wall;
  BinaryMask human;
  std::vector<Detection> detections;
  /// Wall panel corners in frame coordinates.
  Quad panel;
};

namespace detail {

inline int uniform(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline void fill_rect(ImageRGB& img, int x0, int y0, int w, int h, const std::uint8_t* c) {
  const int x1 = std::min(img.width(), x0 + w), y1 = std::min(img.height(), y0 + h);
  for (int y = std::max(0, y0); y < y1; ++y)
    for (int x = std::max(0, x0); x < x1; ++x) std::copy_n(c, 3, img.pixel(x, y));
}

}  // namespace detail

/// Uniform in [0, 1) from the top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Unlike std::normal_distribution the
/// sequence does not depend on the standard library.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// A fixed backdrop larger than the frame, plus the panel rectangle in
/// backdrop coordinates.
class Backdrop {
 public:
  explicit Backdrop(const SceneParams& p) : p_(p) {
    const int travel_x = std::abs(p.dx) * std::max(0, p.frames - 1);
    const int travel_y = std::abs(p.dy) * std::max(0, p.frames - 1);
    margin_ = 8;
    img_ = ImageRGB(p.frame_w + travel_x + 2 * margin_, p.frame_h + travel_y + 2 * margin_);
    std::mt19937_64 rng(p.seed);
    using detail::uniform;

    // Counter-top gradient base.
    for (int y = 0; y < img_.height(); ++y) {
      for (int x = 0; x < img_.width(); ++x) {
        auto* px = img_.pixel(x, y);
        px[0] = static_cast<std::uint8_t>(90 + (x * 37 + y * 11) % 40);
        px[1] = static_cast<std::uint8_t>(80 + (x * 13 + y * 29) % 40);
        px[2] = static_cast<std::uint8_t>(70 + (x * 7 + y * 17) % 40);
      }
    }
    // Cabinets, utensils, tiles: random axis-aligned blocks.
    for (int i = 0; i < p.clutter; ++i) {
      const int w = uniform(rng, 5, 36), h = uniform(rng, 5, 36);
      const int x = uniform(rng, -10, img_.width() - 1), y = uniform(rng, -10, img_.height() - 1);
      const std::uint8_t c[3] = {static_cast<std::uint8_t>(uniform(rng, 10, 245)),
                                 static_cast<std::uint8_t>(uniform(rng, 10, 245)),
                                 static_cast<std::uint8_t>(uniform(rng, 10, 245))};
      detail::fill_rect(img_, x, y, w, h, c);
    }
    // Flat wall panel inside the area visible in every frame.
    const int vis_x0 = margin_ + travel_x, vis_y0 = margin_ + travel_y;
    const int vis_w = p.frame_w - travel_x, vis_h = p.frame_h - travel_y;
    panel_ = Rect{vis_x0 + vis_w / 4, vis_y0 + vis_h / 8, std::max(8, vis_w / 2),
                  std::max(8, vis_h * 2 / 5)};
    const std::uint8_t frame_col[3] = {60, 50, 40};
    const std::uint8_t wall_col[3] = {214, 205, 188};
    detail::fill_rect(img_, panel_.x - 3, panel_.y - 3, panel_.w + 6, panel_.h + 6, frame_col);
    detail::fill_rect(img_, panel_.x, panel_.y, panel_.w, panel_.h, wall_col);
  }

  const ImageRGB& image() const { return img_; }
  const Rect& panel() const { return panel_; }

  /// Top-left of frame t's window in backdrop coordinates.
  Point2 origin(int t) const {
    const int ox = margin_ + (p_.dx < 0 ? std::abs(p_.dx) * (p_.frames - 1) : 0) + p_.dx * t;
    const int oy = margin_ + (p_.dy < 0 ? std::abs(p_.dy) * (p_.frames - 1) : 0) + p_.dy * t;
    return {static_cast<double>(ox), static_cast<double>(oy)};
  }

  /// Panel quad seen in frame t (pixel-centre corners).
  Quad panel_quad(int t) const {
    const Point2 o = origin(t);
    return rect_to_quad({panel_.x - static_cast<int>(o.x), panel_.y - static_cast<int>(o.y), panel_.w,
                         panel_.h});
  }

  Frame frame(int t) const {
    const int ox = static_cast<int>(origin(t).x), oy = static_cast<int>(origin(t).y);
    Frame f;
    f.image = ImageRGB(p_.frame_w, p_.frame_h);
    f.wall = BinaryMask(p_.frame_w, p_.frame_h);
    f.human = BinaryMask(p_.frame_w, p_.frame_h);
    for (int y = 0; y < p_.frame_h; ++y) {
      std::copy_n(img_.pixel(ox, oy + y), static_cast<std::size_t>(p_.frame_w) * 3, f.image.pixel(0, y));
    }
    const Rect pr{panel_.x - ox, panel_.y - oy, panel_.w, panel_.h};
    for (int y = std::max(0, pr.y); y < std::min(p_.frame_h, pr.y + pr.h); ++y)
      for (int x = std::max(0, pr.x); x < std::min(p_.frame_w, pr.x + pr.w); ++x) f.wall.set(x, y);
    f.panel = rect_to_quad(pr);

    if (p_.with_person) {
      // An ellipse walking right to left across the lower panel edge.
      const double cx = pr.x + pr.w * (0.85 - 0.6 * t / std::max(1, p_.frames - 1));
      const double cy = pr.y + pr.h * 1.05;
      const double rx = std::max(6.0, pr.w * 0.07), ry = std::max(10.0, pr.h * 0.45);
      const std::uint8_t skin[3] = {168, 120, 96};
      for (int y = 0; y < p_.frame_h; ++y) {
        for (int x = 0; x < p_.frame_w; ++x) {
          const double u = (x - cx) / rx, v = (y - cy) / ry;
          if (u * u + v * v <= 1.0) {
            f.human.set(x, y);
            std::copy_n(skin, 3, f.image.pixel(x, y));
          }
        }
      }
      // The wall mask excludes occluded wall.
      for (std::size_t i = 0; i < f.wall.bits().size(); ++i) {
        if (f.human.bits()[i]) f.wall.bits()[i] = 0;
      }
    }
    if (p_.kitchen) {
      f.detections.push_back({"person", 0.97, {pr.x + pr.w * 0.6, pr.y + pr.h * 0.5, 40, 120}});
      f.detections.push_back({"cup", 0.91, {10, p_.frame_h - 40.0, 20, 20}});
    } else {
      f.detections.push_back({"person", 0.97, {20, 20, 40, 120}});
      f.detections.push_back({"chair", 0.88, {100, 150, 60, 60}});
    }
    return f;
  }

 private:
  SceneParams p_;
  int margin_ = 0;
  ImageRGB img_;
  Rect panel_;
};

/// A 300x600-style poster: colour bands plus a ramp, for relighting and
/// compositing checks.
inline ImageRGB make_ad(int w, int h, std::uint64_t seed = 3) {
  ImageRGB ad(w, h);
  std::mt19937_64 rng(seed);
  const std::uint8_t base[3] = {static_cast<std::uint8_t>(detail::uniform(rng, 150, 230)),
                                static_cast<std::uint8_t>(detail::uniform(rng, 20, 90)),
                                static_cast<std::uint8_t>(detail::uniform(rng, 40, 120))};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = ad.pixel(x, y);
      const int band = (y * 6) / std::max(1, h);
      p[0] = static_cast<std::uint8_t>((base[0] + band * 17 + x * 40 / std::max(1, w)) % 256);
      p[1] = static_cast<std::uint8_t>((base[1] + band * 31 + y * 60 / std::max(1, h)) % 256);
      p[2] = static_cast<std::uint8_t>((base[2] + band * 47) % 256);
    }
  }
  return ad;
}

}  // namespace vpp::synthetic
