#pragma once

// Ambient-light rendering: four ways of re-lighting an ad so that it sits
// plausibly in a background frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

struct ChannelStats {
  double mean = 0;
  double std = 0;
};

namespace detail {

struct StatsAccumulator {
  std::array<double, 3> sum{}, sq{};
  double n = 0;

  void add(const float* lab, std::size_t npix) {
    for (std::size_t i = 0; i < npix * 3; i += 3) {
      for (int c = 0; c < 3; ++c) {
        sum[c] += lab[i + c];
        sq[c] += static_cast<double>(lab[i + c]) * lab[i + c];
      }
    }
    n += static_cast<double>(npix);
  }

  std::array<ChannelStats, 3> finish() const {
    std::array<ChannelStats, 3> out{};
    if (n == 0) return out;
    for (int c = 0; c < 3; ++c) {
      out[c].mean = sum[c] / n;
      out[c].std = std::sqrt(std::max(0.0, sq[c] / n - out[c].mean * out[c].mean));
    }
    return out;
  }
};

}  // namespace detail

/// Population mean/std of each LAB channel.
inline std::array<ChannelStats, 3> lab_channel_stats(const ImageLab& img) {
  detail::StatsAccumulator acc;
  acc.add(img.data().data(), img.pixel_count());
  return acc.finish();
}

/// LAB channel statistics of an RGB image, converted block-wise without
/// materializing the LAB image.
inline std::array<ChannelStats, 3> lab_channel_stats(const ImageRGB& img) {
  constexpr std::size_t kBlock = 4096;
  std::array<float, kBlock * 3> buf;
  detail::StatsAccumulator acc;
  const std::uint8_t* src = img.data().data();
  for (std::size_t done = 0; done < img.pixel_count(); done += kBlock) {
    const std::size_t n = std::min(kBlock, img.pixel_count() - done);
    detail::rgb_to_lab_block(src + done * 3, buf.data(), n);
    acc.add(buf.data(), n);
  }
  return acc.finish();
}

/// Mean BT.601 luminance on the 0..255 scale (unrounded).
inline double mean_luminance(const ImageRGB& img) {
  double s = 0;
  auto d = img.data();
  for (std::size_t i = 0; i < d.size(); i += 3) {
    s += 0.299 * d[i] + 0.587 * d[i + 1] + 0.114 * d[i + 2];
  }
  return img.pixel_count() ? s / static_cast<double>(img.pixel_count()) : 0.0;
}

namespace detail {

inline void require_non_empty(const ImageRGB& ad, const ImageRGB& bg) {
  if (ad.empty() || bg.empty()) throw Error(ErrorCode::empty_image, "relighting needs two images");
}

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

}  // namespace detail

/// g(x) = alpha * f(x) + beta per channel, with beta chosen so the mean
/// luminance lands on the background's.
inline ImageRGB match_brightness(const ImageRGB& ad, const ImageRGB& background,
                                 double alpha = 1.0) {
  detail::require_non_empty(ad, background);
  const double beta = mean_luminance(background) - alpha * mean_luminance(ad);
  ImageRGB out(ad.width(), ad.height());
  auto s = ad.data();
  auto d = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = detail::clamp_u8(alpha * s[i] + beta);
  return out;
}

/// Per selected channel: (v - mean_src) * (std_dst / std_src) + mean_dst.
/// A flat source channel (std 0) maps onto the target mean. The result is not
/// clamped; range clamping happens on conversion back to RGB.
inline ImageLab transfer_lab_statistics(ImageLab src, const std::array<ChannelStats, 3>& target,
                                        std::array<bool, 3> channels = {true, true, true}) {
  const auto stats = lab_channel_stats(src);
  std::array<double, 3> scale{1, 1, 1};
  for (int c = 0; c < 3; ++c) {
    if (stats[c].std > 1e-9) scale[c] = target[c].std / stats[c].std;
  }
  auto d = src.data();
  for (int c = 0; c < 3; ++c) {
    if (!channels[c]) continue;
    const double k = scale[c], shift = target[c].mean - stats[c].mean * scale[c];
    for (std::size_t i = static_cast<std::size_t>(c); i < d.size(); i += 3) {
      d[i] = static_cast<float>(d[i] * k + shift);
    }
  }
  return src;
}

/// Reinhard-style statistics transfer on all three LAB channels.
inline ImageRGB color_transfer(const ImageRGB& ad, const ImageRGB& background) {
  detail::require_non_empty(ad, background);
  const auto target = lab_channel_stats(background);
  return lab_to_rgb(transfer_lab_statistics(rgb_to_lab(ad), target));
}

/// Statistics transfer on L only; a and b pass through untouched.
inline ImageRGB lab_light_transfer(const ImageRGB& ad, const ImageRGB& background) {
  detail::require_non_empty(ad, background);
  const auto target = lab_channel_stats(background);
  return lab_to_rgb(transfer_lab_statistics(rgb_to_lab(ad), target, {true, false, false}));
}

/// lut[v] = smallest u with cdf_target(u) >= cdf_source(v).
inline std::array<std::uint8_t, 256> histogram_match_lut(const Cdf& source, const Cdf& target) {
  std::array<std::uint8_t, 256> lut{};
  int u = 0;
  for (int v = 0; v < 256; ++v) {
    // Both CDFs are non-decreasing, so u only ever moves forward.
    while (u < 255 && target.values[u] < source.values[v]) ++u;
    lut[v] = static_cast<std::uint8_t>(u);
  }
  return lut;
}

/// Per-RGB-channel CDF matching.
inline ImageRGB histogram_match(const ImageRGB& ad, const ImageRGB& background) {
  detail::require_non_empty(ad, background);
  ImageRGB out = ad;
  auto d = out.data();
  for (int c = 0; c < 3; ++c) {
    const auto lut = histogram_match_lut(cdf_from_histogram(channel_histogram(ad, c)),
                                         cdf_from_histogram(channel_histogram(background, c)));
    for (std::size_t i = static_cast<std::size_t>(c); i < d.size(); i += 3) d[i] = lut[d[i]];
  }
  return out;
}

enum class LightMethod { none, brightness, color, lab_light, histogram };

inline std::string_view to_string(LightMethod m) {
  switch (m) {
    case LightMethod::none: return "none";
    case LightMethod::brightness: return "brightness";
    case LightMethod::color: return "color";
    case LightMethod::lab_light: return "lab_light";
    case LightMethod::histogram: return "histogram";
  }
  return "none";
}

inline LightMethod parse_light_method(std::string_view s) {
  for (auto m : {LightMethod::none, LightMethod::brightness, LightMethod::color,
                 LightMethod::lab_light, LightMethod::histogram}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::config_error, "unknown light method '" + std::string(s) + "'");
}

inline ImageRGB relight(const ImageRGB& ad, const ImageRGB& background, LightMethod method,
                        double brightness_alpha = 1.0) {
  switch (method) {
    case LightMethod::none: return ad;
    case LightMethod::brightness: return match_brightness(ad, background, brightness_alpha);
    case LightMethod::color: return color_transfer(ad, background);
    case LightMethod::lab_light: return lab_light_transfer(ad, background);
    case LightMethod::histogram: return histogram_match(ad, background);
  }
  return ad;
}

inline ImageRGB crop(const ImageRGB& img, const Rect& r) {
  ImageRGB out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    std::copy_n(img.pixel(r.x, r.y + y), static_cast<std::size_t>(r.w) * 3, out.pixel(0, y));
  }
  return out;
}

/// Window twice the size of the quad's bounding box, centred on it and
/// clipped to the frame. nullopt when nothing of it lies inside the frame.
inline std::optional<Rect> quad_neighborhood(const Quad& q, int frame_w, int frame_h) {
  double x0 = q[0].x, x1 = q[0].x, y0 = q[0].y, y1 = q[0].y;
  for (const auto& p : q.corners) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double hw = x1 - x0 + 1, hh = y1 - y0 + 1;
  const int rx0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
  const int ry0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
  const int rx1 = std::min(frame_w - 1, static_cast<int>(std::ceil(cx + hw)));
  const int ry1 = std::min(frame_h - 1, static_cast<int>(std::ceil(cy + hh)));
  if (rx1 < rx0 || ry1 < ry0) return std::nullopt;
  return Rect{rx0, ry0, rx1 - rx0 + 1, ry1 - ry0 + 1};
}

}  // namespace vpp
