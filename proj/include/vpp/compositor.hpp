#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

struct WarpedLayer {
  ImageRGB layer;
  /// Frame pixels covered by the warped ad.
  BinaryMask coverage;
};

/// Corner quad of an image, through its corner pixel centers.
inline Quad image_quad(int width, int height) { return rect_to_quad({0, 0, width, height}); }

namespace detail {

inline void sample_bilinear(const ImageRGB& img, double x, double y, std::uint8_t* out) {
  const int w = img.width(), h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  const std::uint8_t* p00 = img.pixel(x0, y0);
  const std::uint8_t* p10 = img.pixel(x1, y0);
  const std::uint8_t* p01 = img.pixel(x0, y1);
  const std::uint8_t* p11 = img.pixel(x1, y1);
  for (int c = 0; c < 3; ++c) {
    const double top = p00[c] + fx * (p10[c] - p00[c]);
    const double bot = p01[c] + fx * (p11[c] - p01[c]);
    out[c] = static_cast<std::uint8_t>(std::lround(top + fy * (bot - top)));
  }
}

}  // namespace detail

/// Inverse-mapped bilinear warp of `ad` onto `dst` inside a frame of the
/// given size. Pixels outside the quad stay black and uncovered.
inline WarpedLayer warp_ad(const ImageRGB& ad, const Quad& dst, int frame_w, int frame_h) {
  if (ad.empty()) throw Error(ErrorCode::empty_image, "ad image is empty");
  const Homography h = homography_from_quads(image_quad(ad.width(), ad.height()), dst);
  const Eigen::Matrix3d inv = h.inverse().matrix();

  WarpedLayer out{ImageRGB(frame_w, frame_h), BinaryMask(frame_w, frame_h)};
  double x0 = dst[0].x, x1 = dst[0].x, y0 = dst[0].y, y1 = dst[0].y;
  for (const auto& p : dst.corners) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int ix1 = std::min(frame_w - 1, static_cast<int>(std::ceil(x1)));
  const int iy1 = std::min(frame_h - 1, static_cast<int>(std::ceil(y1)));

  // Points of the quad interior share the sign of w with its centroid.
  const Point2 c = dst.centroid();
  const double wc = inv(2, 0) * c.x + inv(2, 1) * c.y + inv(2, 2);
  constexpr double eps = 1e-6;
  const double max_x = ad.width() - 1 + eps, max_y = ad.height() - 1 + eps;

  for (int y = iy0; y <= iy1; ++y) {
    for (int x = ix0; x <= ix1; ++x) {
      const double w = inv(2, 0) * x + inv(2, 1) * y + inv(2, 2);
      if (w * wc <= 0) continue;
      const double sx = (inv(0, 0) * x + inv(0, 1) * y + inv(0, 2)) / w;
      const double sy = (inv(1, 0) * x + inv(1, 1) * y + inv(1, 2)) / w;
      if (sx < -eps || sy < -eps || sx > max_x || sy > max_y) continue;
      detail::sample_bilinear(ad, sx, sy, out.layer.pixel(x, y));
      out.coverage.set(x, y);
    }
  }
  return out;
}

/// frame with ad_layer pasted where ad_mask is set and occlusion is not.
inline ImageRGB composite(const ImageRGB& frame, const ImageRGB& ad_layer,
                          const BinaryMask& ad_mask, const BinaryMask& occlusion) {
  const int w = frame.width(), h = frame.height();
  if (ad_layer.width() != w || ad_layer.height() != h || !ad_mask.same_size(w, h) ||
      !occlusion.same_size(w, h)) {
    throw Error(ErrorCode::dimension_mismatch, "compositing inputs differ in size");
  }
  ImageRGB out = frame;
  auto m = ad_mask.bits();
  auto o = occlusion.bits();
  auto src = ad_layer.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] && !o[i]) {
      dst[3 * i] = src[3 * i];
      dst[3 * i + 1] = src[3 * i + 1];
      dst[3 * i + 2] = src[3 * i + 2];
    }
  }
  return out;
}

/// Warp + composite with the occlusion mask grown by `occlusion_dilation`.
inline ImageRGB place_ad(const ImageRGB& frame, const ImageRGB& ad, const Quad& dst,
                         const std::optional<BinaryMask>& occlusion, int occlusion_dilation = 2) {
  const auto warped = warp_ad(ad, dst, frame.width(), frame.height());
  const BinaryMask occ = occlusion ? dilate(*occlusion, occlusion_dilation)
                                   : BinaryMask(frame.width(), frame.height());
  return composite(frame, warped.layer, warped.coverage, occ);
}

}  // namespace vpp
