#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "vpp/error.hpp"

namespace vpp {

/// Dense row-major raster with interleaved channels.
template <typename T, int Channels>
class Image {
 public:
  using value_type = T;
  static constexpr int channels = Channels;

  Image() = default;

  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw Error(ErrorCode::format_error, "negative image dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  Image(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * height * Channels) {
      throw Error(ErrorCode::format_error, "image buffer does not match dimensions");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }
  const T& at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }

  T* pixel(int x, int y) noexcept {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * Channels;
  }
  const T* pixel(int x, int y) const noexcept {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * Channels;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& buffer() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageRGB = Image<std::uint8_t, 3>;
using ImageGray = Image<std::uint8_t, 1>;
/// CIELAB triples (L, a, b); L in [0,100] for in-gamut input.
using ImageLab = Image<float, 3>;

/// One boolean per pixel; true marks the foreground/selected set.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0),
              fill ? 1 : 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return bits_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool get(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v = true) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  /// Out-of-range coordinates read as false.
  bool test(int x, int y) const noexcept { return contains(x, y) && get(x, y); }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  bool same_size(int w, int h) const noexcept { return width_ == w && height_ == h; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Empirical cumulative distribution over 8-bit intensities.
struct Cdf {
  std::array<double, 256> values{};
};

using Histogram = std::array<std::uint64_t, 256>;

namespace detail {

struct SrgbTables {
  static constexpr int kBins = 8192;

  std::array<double, 256> to_linear{};
  // Linear-light value at the midpoint between consecutive 8-bit codes;
  // encoding against these thresholds rounds exactly in the encoded domain.
  std::array<double, 255> encode_threshold{};
  // First guess of the code for each linear bin, refined by encode_srgb.
  std::array<std::uint8_t, kBins + 1> encode_guess{};

  SrgbTables() {
    auto linearize = [](double c) {
      return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    for (int i = 0; i < 256; ++i) to_linear[i] = linearize(i / 255.0);
    for (int i = 0; i < 255; ++i) encode_threshold[i] = linearize((i + 0.5) / 255.0);
    for (int b = 0; b <= kBins; ++b) {
      const double x = static_cast<double>(b) / kBins;
      encode_guess[b] = static_cast<std::uint8_t>(
          std::upper_bound(encode_threshold.begin(), encode_threshold.end(), x) -
          encode_threshold.begin());
    }
  }
};

inline const SrgbTables& srgb_tables() {
  static const SrgbTables tables;
  return tables;
}

/// Nearest 8-bit sRGB code of a linear-light value, clamped to [0,255].
inline std::uint8_t encode_srgb(double linear) {
  const auto& t = srgb_tables();
  if (!(linear > 0)) return 0;
  if (linear >= 1) return 255;
  int c = t.encode_guess[static_cast<int>(linear * SrgbTables::kBins)];
  while (c < 255 && t.encode_threshold[c] <= linear) ++c;
  while (c > 0 && t.encode_threshold[c - 1] > linear) --c;
  return static_cast<std::uint8_t>(c);
}

/// Cube root for positive finite arguments: bit-level seed refined by two
/// Halley steps (relative error below 1e-14).
inline double fast_cbrt(double t) {
  std::uint64_t bits;
  std::memcpy(&bits, &t, sizeof bits);
  bits = bits / 3 + 0x2A9F7893782DA1CEull;
  double y;
  std::memcpy(&y, &bits, sizeof y);
  for (int i = 0; i < 2; ++i) {
    const double y3 = y * y * y;
    y = y * (y3 + 2.0 * t) / (2.0 * y3 + t);
  }
  return y;
}

// D65 reference white.
inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;
inline constexpr double kDelta = 6.0 / 29.0;

inline double lab_f(double t) {
  constexpr double d3 = kDelta * kDelta * kDelta;
  return t > d3 ? fast_cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

inline double lab_finv(double f) {
  return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

}  // namespace detail

struct Lab {
  double L = 0, a = 0, b = 0;
};

inline Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const auto& lin = detail::srgb_tables().to_linear;
  const double R = lin[r], G = lin[g], B = lin[b];
  const double X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B;
  const double Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B;
  const double Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B;
  const double fx = detail::lab_f(X / detail::kWhiteX);
  const double fy = detail::lab_f(Y / detail::kWhiteY);
  const double fz = detail::lab_f(Z / detail::kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// Out-of-gamut results clamp to [0,255] per channel.
inline std::array<std::uint8_t, 3> lab_to_rgb(double L, double a, double b) {
  const double fy = (L + 16.0) / 116.0;
  const double X = detail::kWhiteX * detail::lab_finv(fy + a / 500.0);
  const double Y = detail::kWhiteY * detail::lab_finv(fy);
  const double Z = detail::kWhiteZ * detail::lab_finv(fy - b / 200.0);
  const double R = 3.2404542 * X - 1.5371385 * Y - 0.4985314 * Z;
  const double G = -0.9692660 * X + 1.8760108 * Y + 0.0415560 * Z;
  const double B = 0.0556434 * X - 0.2040259 * Y + 1.0572252 * Z;
  return {detail::encode_srgb(R), detail::encode_srgb(G), detail::encode_srgb(B)};
}

namespace detail {

inline float fast_cbrtf(float t) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(t);
  bits = bits / 3 + 709921077u;
  float y = std::bit_cast<float>(bits);
  for (int i = 0; i < 2; ++i) {
    const float y3 = y * y * y;
    y = y * (y3 + 2.f * t) / (2.f * y3 + t);
  }
  return y;
}

/// Converts `npix` interleaved RGB pixels into interleaved LAB floats.
/// Written as three flat passes so the cube-root pass vectorizes.
inline void rgb_to_lab_block(const std::uint8_t* src, float* dst, std::size_t npix) {
  const auto& lin = srgb_tables().to_linear;
  const std::size_t n = npix * 3;
  for (std::size_t i = 0; i < n; i += 3) {
    const double R = lin[src[i]], G = lin[src[i + 1]], B = lin[src[i + 2]];
    dst[i] = static_cast<float>((0.4124564 * R + 0.3575761 * G + 0.1804375 * B) / kWhiteX);
    dst[i + 1] = static_cast<float>((0.2126729 * R + 0.7151522 * G + 0.0721750 * B) / kWhiteY);
    dst[i + 2] = static_cast<float>((0.0193339 * R + 0.1191920 * G + 0.9503041 * B) / kWhiteZ);
  }
  constexpr float d3 = static_cast<float>(kDelta * kDelta * kDelta);
  constexpr float slope = static_cast<float>(1.0 / (3.0 * kDelta * kDelta));
  constexpr float offset = static_cast<float>(4.0 / 29.0);
  for (std::size_t i = 0; i < n; ++i) {
    const float t = dst[i];
    const float root = fast_cbrtf(t > d3 ? t : 1.f);
    dst[i] = t > d3 ? root : t * slope + offset;
  }
  for (std::size_t i = 0; i < n; i += 3) {
    const float fx = dst[i], fy = dst[i + 1], fz = dst[i + 2];
    dst[i] = 116.f * fy - 16.f;
    dst[i + 1] = 500.f * (fx - fy);
    dst[i + 2] = 200.f * (fy - fz);
  }
}

}  // namespace detail

inline ImageLab rgb_to_lab(const ImageRGB& img) {
  ImageLab out(img.width(), img.height());
  detail::rgb_to_lab_block(img.data().data(), out.data().data(), img.pixel_count());
  return out;
}

inline ImageRGB lab_to_rgb(const ImageLab& img) {
  ImageRGB out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const auto rgb = lab_to_rgb(src[i], src[i + 1], src[i + 2]);
    dst[i] = rgb[0];
    dst[i + 1] = rgb[1];
    dst[i + 2] = rgb[2];
  }
  return out;
}

/// BT.601 luma, rounded to nearest.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

inline ImageGray to_gray(const ImageRGB& img) {
  ImageGray out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0, j = 0; j < dst.size(); i += 3, ++j) {
    dst[j] = luma(src[i], src[i + 1], src[i + 2]);
  }
  return out;
}

inline ImageRGB gray_to_rgb(const ImageGray& img) {
  ImageRGB out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t j = 0; j < src.size(); ++j) {
    dst[3 * j] = dst[3 * j + 1] = dst[3 * j + 2] = src[j];
  }
  return out;
}

/// Histogram of one interleaved channel.
template <int C>
Histogram channel_histogram(const Image<std::uint8_t, C>& img, int channel = 0) {
  Histogram h{};
  auto d = img.data();
  for (std::size_t i = static_cast<std::size_t>(channel); i < d.size(); i += C) ++h[d[i]];
  return h;
}

inline Cdf cdf_from_histogram(const Histogram& h) {
  std::uint64_t total = 0;
  for (auto c : h) total += c;
  if (total == 0) throw Error(ErrorCode::empty_image, "histogram has no samples");
  Cdf cdf;
  std::uint64_t running = 0;
  for (int k = 0; k < 256; ++k) {
    running += h[k];
    cdf.values[k] = static_cast<double>(running) / static_cast<double>(total);
  }
  return cdf;
}

/// values[k] = fraction of pixels with intensity <= k.
inline Cdf compute_cdf(const ImageGray& img) {
  if (img.empty()) throw Error(ErrorCode::empty_image, "cannot compute CDF of an empty image");
  return cdf_from_histogram(channel_histogram(img));
}

namespace detail {

// Sliding-window OR along one axis; O(n) per line independent of radius.
inline void dilate_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride,
                        int radius) {
  int active = 0;
  for (int i = 0; i < std::min(radius, n); ++i) active += in[i * stride];
  for (int i = 0; i < n; ++i) {
    const int enter = i + radius;
    const int leave = i - radius - 1;
    if (enter < n) active += in[enter * stride];
    if (leave >= 0) active -= in[leave * stride];
    out[i * stride] = active > 0 ? 1 : 0;
  }
}

}  // namespace detail

/// Chebyshev (square structuring element) dilation.
inline BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) throw Error(ErrorCode::config_error, "dilation radius must be >= 0");
  if (radius == 0 || mask.empty()) return mask;
  const int w = mask.width(), h = mask.height();
  BinaryMask tmp(w, h), out(w, h);
  const std::uint8_t* src = mask.bits().data();
  std::uint8_t* mid = tmp.bits().data();
  for (int y = 0; y < h; ++y) {
    detail::dilate_line(src + static_cast<std::ptrdiff_t>(y) * w,
                        mid + static_cast<std::ptrdiff_t>(y) * w, w, 1, radius);
  }
  std::uint8_t* dst = out.bits().data();
  for (int x = 0; x < w; ++x) detail::dilate_line(mid + x, dst + x, h, w, radius);
  return out;
}

}  // namespace vpp
