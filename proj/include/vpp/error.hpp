#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpp {

/// Failure categories shared by every module.
enum class ErrorCode {
  io_error,
  format_error,
  empty_image,
  image_too_small,
  dimension_mismatch,
  degenerate_segment,
  degenerate_quad,
  degenerate_output,
  degenerate_homography,
  degenerate_track,
  point_at_infinity,
  insufficient_matches,
  no_model,
  empty_input,
  length_mismatch,
  config_error,
  empty_sequence,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::format_error: return "format-error";
    case ErrorCode::empty_image: return "empty-image";
    case ErrorCode::image_too_small: return "image-too-small";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::degenerate_segment: return "degenerate-segment";
    case ErrorCode::degenerate_quad: return "degenerate-quad";
    case ErrorCode::degenerate_output: return "degenerate-output";
    case ErrorCode::degenerate_homography: return "degenerate-homography";
    case ErrorCode::degenerate_track: return "degenerate-track";
    case ErrorCode::point_at_infinity: return "point-at-infinity";
    case ErrorCode::insufficient_matches: return "insufficient-matches";
    case ErrorCode::no_model: return "no-model";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::empty_sequence: return "empty-sequence";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vpp
