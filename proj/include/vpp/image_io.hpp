#pragma once

// PNG (via libpng) and binary PPM/PGM raster I/O.

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

/// 16-bit single-channel raster (plane/label ids).
using LabelMap = Image<std::uint16_t, 1>;

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return f;
}

struct PngError {
  std::jmp_buf jump;
  char message[256] = {0};
};

inline void png_error_cb(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof(err->message), "%s", msg);
  std::longjmp(err->jump, 1);
}

inline void png_warning_cb(png_structp, png_const_charp) {}

/// Decoded samples; 16-bit sources are widened to one uint16 per sample.
struct PngRaw {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> samples8;
  std::vector<std::uint16_t> samples16;
};

inline PngRaw read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::format_error, path.string() + " is not a PNG file");
  }

  PngError err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb,
                                           png_warning_cb);
  if (!png) throw Error(ErrorCode::io_error, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::io_error, "png_create_info_struct failed");
  }

  PngRaw raw;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(err.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::format_error, path.string() + ": " + err.message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (raw.bit_depth == 16) {
    raw.samples16.resize(buffer.size() / 2);
    for (std::size_t i = 0; i < raw.samples16.size(); ++i) {
      raw.samples16[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  } else {
    raw.samples8 = std::move(buffer);
  }
  return raw;
}

template <int C>
void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               const std::uint8_t* bytes) {
  static_assert(C == 1 || C == 3);
  FilePtr file = open_file(path, "wb");
  PngError err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb,
                                            png_warning_cb);
  if (!png) throw Error(ErrorCode::io_error, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::io_error, "png_create_info_struct failed");
  }
  if (setjmp(err.jump)) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io_error, path.string() + ": " + err.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth,
               C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 3);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * C * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes + rowbytes * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header token reader; skips whitespace and '#' comments.
inline int pnm_token(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) {
    throw Error(ErrorCode::format_error, "malformed PNM header");
  }
  long value = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    value = value * 10 + (buf[pos++] - '0');
    if (value > (1 << 24)) throw Error(ErrorCode::format_error, "PNM dimension too large");
  }
  return static_cast<int>(value);
}

inline ImageRGB read_pnm(const std::filesystem::path& path) {
  const auto buf = read_all(path);
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '6' && buf[1] != '5')) {
    throw Error(ErrorCode::format_error, path.string() + " is not a binary PPM/PGM");
  }
  const bool gray = buf[1] == '5';
  std::size_t pos = 2;
  const int w = pnm_token(buf, pos);
  const int h = pnm_token(buf, pos);
  const int maxval = pnm_token(buf, pos);
  if (w < 1 || h < 1) throw Error(ErrorCode::format_error, "PNM has zero size");
  if (maxval > 255) throw Error(ErrorCode::format_error, "16-bit PNM is not supported");
  if (maxval < 1) throw Error(ErrorCode::format_error, "invalid PNM maxval");
  if (pos >= buf.size() || !std::isspace(buf[pos])) {
    throw Error(ErrorCode::format_error, "malformed PNM header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * h * (gray ? 1 : 3);
  if (buf.size() - pos < n) throw Error(ErrorCode::format_error, "truncated PNM data");
  ImageRGB img(w, h);
  auto dst = img.data();
  if (gray) {
    for (std::size_t i = 0; i < n; ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = buf[pos + i];
  } else {
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(pos), n, dst.begin());
  }
  return img;
}

inline bool has_png_signature(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  return std::fread(sig, 1, 8, f.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace detail

/// Loads an 8-bit PNG (gray, RGB, palette; alpha dropped) or binary PPM/PGM.
inline ImageRGB load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::io_error, "missing " + path.string());
  if (!detail::has_png_signature(path)) return detail::read_pnm(path);
  auto raw = detail::read_png(path);
  if (raw.bit_depth != 8) {
    throw Error(ErrorCode::format_error, path.string() + ": only 8-bit PNG images are supported");
  }
  if (raw.channels == 3) return ImageRGB(raw.width, raw.height, std::move(raw.samples8));
  return gray_to_rgb(ImageGray(raw.width, raw.height, std::move(raw.samples8)));
}

inline ImageGray load_gray(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::io_error, "missing " + path.string());
  if (detail::has_png_signature(path)) {
    auto raw = detail::read_png(path);
    if (raw.bit_depth == 8 && raw.channels == 1) {
      return ImageGray(raw.width, raw.height, std::move(raw.samples8));
    }
  }
  return to_gray(load_image(path));
}

/// Nonzero samples load as true.
inline BinaryMask load_mask(const std::filesystem::path& path) {
  const ImageGray g = load_gray(path);
  BinaryMask m(g.width(), g.height());
  auto src = g.data();
  auto dst = m.bits();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 1 : 0;
  return m;
}

/// Grayscale PNG, 8- or 16-bit; label = sample value.
inline LabelMap load_label_map(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::io_error, "missing " + path.string());
  auto raw = detail::read_png(path);
  if (raw.channels != 1) throw Error(ErrorCode::format_error, "label map must be grayscale");
  if (raw.bit_depth == 16) return LabelMap(raw.width, raw.height, std::move(raw.samples16));
  std::vector<std::uint16_t> v(raw.samples8.begin(), raw.samples8.end());
  return LabelMap(raw.width, raw.height, std::move(v));
}

inline void save_png(const std::filesystem::path& path, const ImageRGB& img) {
  detail::write_png<3>(path, img.width(), img.height(), 8, img.data().data());
}

inline void save_png(const std::filesystem::path& path, const ImageGray& img) {
  detail::write_png<1>(path, img.width(), img.height(), 8, img.data().data());
}

/// 0 = false, 255 = true.
inline void save_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  ImageGray g(mask.width(), mask.height());
  auto src = mask.bits();
  auto dst = g.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  save_png(path, g);
}

inline void save_label_map(const std::filesystem::path& path, const LabelMap& labels) {
  std::vector<std::uint8_t> be(labels.data().size() * 2);
  auto src = labels.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(src[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(src[i] & 0xff);
  }
  detail::write_png<1>(path, labels.width(), labels.height(), 16, be.data());
}

inline void save_ppm(const std::filesystem::path& path, const ImageRGB& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.data().size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace vpp
