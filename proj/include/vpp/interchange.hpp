#pragma once

// JSON artifacts exchanged with external model adapters and written by the
// pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"
#include "vpp/regions.hpp"
#include "vpp/scene.hpp"
#include "vpp/tracker/features.hpp"

namespace vpp {

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

namespace detail {

template <class F>
auto with_format_check(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, what + ": " + e.what());
  }
}

inline json quad_json(const Quad& q) {
  json a = json::array();
  for (const auto& p : q.corners) a.push_back({p.x, p.y});
  return a;
}

inline Quad quad_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::format_error, "quad needs 4 corners");
  Quad q;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_array() || j[i].size() != 2) throw Error(ErrorCode::format_error, "corner needs x, y");
    q[i] = {j[i][0].get<double>(), j[i][1].get<double>()};
  }
  return q;
}

}  // namespace detail

// ---- lines ------------------------------------------------------------------

inline json lines_to_json(const LineSegmentSet& lines) {
  json segs = json::array();
  for (const auto& s : lines) segs.push_back({s.p1.x, s.p1.y, s.p2.x, s.p2.y});
  return {{"segments", segs}};
}

/// Segments with coincident endpoints are skipped; orientation is left as
/// `other` for the caller to classify.
inline LineSegmentSet lines_from_json(const json& j) {
  return detail::with_format_check("lines", [&] {
    LineSegmentSet out;
    for (const auto& s : j.at("segments")) {
      if (!s.is_array() || s.size() != 4) throw Error(ErrorCode::format_error, "segment needs 4 numbers");
      LineSegment seg{{s[0].get<double>(), s[1].get<double>()}, {s[2].get<double>(), s[3].get<double>()}};
      if (seg.length() > 0) out.push_back(seg);
    }
    return out;
  });
}

inline LineSegmentSet load_lines(const std::filesystem::path& path) {
  return lines_from_json(read_json_file(path));
}

// ---- detections -------------------------------------------------------------

inline json detections_to_json(std::span<const Detection> dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    arr.push_back({{"label", d.label},
                   {"score", d.score},
                   {"bbox", {d.bbox[0], d.bbox[1], d.bbox[2], d.bbox[3]}}});
  }
  return {{"detections", arr}};
}

/// Boxes are clipped to the frame when a frame size is given.
inline std::vector<Detection> detections_from_json(const json& j, int frame_w = 0, int frame_h = 0) {
  return detail::with_format_check("detections", [&] {
    std::vector<Detection> out;
    for (const auto& d : j.at("detections")) {
      Detection det;
      det.label = d.at("label").get<std::string>();
      det.score = d.at("score").get<double>();
      if (!(det.score >= 0 && det.score <= 1)) {
        throw Error(ErrorCode::format_error, "detection score outside [0, 1]");
      }
      const auto& b = d.at("bbox");
      if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::format_error, "bbox needs 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) det.bbox[i] = b[i].get<double>();
      if (frame_w > 0 && frame_h > 0) {
        const double x0 = std::clamp(det.bbox[0], 0.0, static_cast<double>(frame_w));
        const double y0 = std::clamp(det.bbox[1], 0.0, static_cast<double>(frame_h));
        const double x1 = std::clamp(det.bbox[0] + det.bbox[2], 0.0, static_cast<double>(frame_w));
        const double y1 = std::clamp(det.bbox[1] + det.bbox[3], 0.0, static_cast<double>(frame_h));
        det.bbox = {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
      }
      out.push_back(std::move(det));
    }
    return out;
  });
}

inline std::vector<Detection> load_detections(const std::filesystem::path& path, int frame_w = 0,
                                              int frame_h = 0) {
  return detections_from_json(read_json_file(path), frame_w, frame_h);
}

// ---- region proposals -------------------------------------------------------

inline json region_to_json(const RegionProposal& r) {
  return {{"bbox", {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h}},
          {"area", r.blob_area},
          {"quad", r.aligned ? detail::quad_json(*r.aligned) : json(nullptr)}};
}

inline RegionProposal region_from_json(const json& j) {
  return detail::with_format_check("region", [&] {
    RegionProposal r;
    const auto& b = j.at("bbox");
    r.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
    r.blob_area = j.at("area").get<int>();
    if (!j.at("quad").is_null()) r.aligned = detail::quad_from_json(j.at("quad"));
    return r;
  });
}

// ---- keypoints and descriptors ----------------------------------------------

inline std::string descriptor_to_hex(const BinaryDescriptor& d) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(64, '0');
  // Byte k holds bits 8k..8k+7, least significant bit first.
  for (int k = 0; k < 32; ++k) {
    const auto byte = static_cast<unsigned>((d[static_cast<std::size_t>(k) / 8] >> ((k % 8) * 8)) & 0xffu);
    s[static_cast<std::size_t>(2 * k)] = digits[byte >> 4];
    s[static_cast<std::size_t>(2 * k + 1)] = digits[byte & 15];
  }
  return s;
}

inline BinaryDescriptor descriptor_from_hex(const std::string& s) {
  if (s.size() != 64) throw Error(ErrorCode::format_error, "descriptor hex must have 64 digits");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw Error(ErrorCode::format_error, "bad hex digit in descriptor");
  };
  BinaryDescriptor d{};
  for (int k = 0; k < 32; ++k) {
    const std::uint64_t byte = (nibble(s[static_cast<std::size_t>(2 * k)]) << 4) |
                               nibble(s[static_cast<std::size_t>(2 * k + 1)]);
    d[static_cast<std::size_t>(k) / 8] |= byte << ((k % 8) * 8);
  }
  return d;
}

inline json features_to_json(const Features& f) {
  json kps = json::array(), descs = json::array();
  for (const auto& k : f.keypoints) kps.push_back({k.pt.x, k.pt.y, k.response, k.angle});
  for (const auto& d : f.descriptors) descs.push_back(descriptor_to_hex(d));
  return {{"keypoints", kps}, {"descriptors", descs}};
}

/// Injected features for a frame of the given size.
inline Features features_from_json(const json& j, int frame_w, int frame_h) {
  return detail::with_format_check("features", [&] {
    Features f;
    f.width = frame_w;
    f.height = frame_h;
    for (const auto& k : j.at("keypoints")) {
      if (!k.is_array() || k.size() != 4) throw Error(ErrorCode::format_error, "keypoint needs 4 numbers");
      f.keypoints.push_back({{k[0].get<double>(), k[1].get<double>()}, k[2].get<float>(), k[3].get<float>()});
    }
    for (const auto& d : j.at("descriptors")) f.descriptors.push_back(descriptor_from_hex(d.get<std::string>()));
    if (f.keypoints.size() != f.descriptors.size()) {
      throw Error(ErrorCode::format_error, "keypoint and descriptor counts differ");
    }
    return f;
  });
}

// ---- tracking trace ---------------------------------------------------------

struct TraceRecord {
  int frame = 0;
  std::optional<Quad> quad;
  std::size_t n_matches = 0;
  std::size_t n_inliers = 0;
  std::optional<double> reproj_error;
  std::string method;
};

inline json trace_to_json(const TraceRecord& r) {
  return {{"frame", r.frame},
          {"quad", r.quad ? detail::quad_json(*r.quad) : json(nullptr)},
          {"n_matches", r.n_matches},
          {"n_inliers", r.n_inliers},
          {"reproj_error", r.reproj_error ? json(*r.reproj_error) : json(nullptr)},
          {"method", r.method}};
}

inline TraceRecord trace_from_json(const json& j) {
  return detail::with_format_check("trace", [&] {
    TraceRecord r;
    r.frame = j.at("frame").get<int>();
    if (!j.at("quad").is_null()) r.quad = detail::quad_from_json(j.at("quad"));
    r.n_matches = j.at("n_matches").get<std::size_t>();
    r.n_inliers = j.at("n_inliers").get<std::size_t>();
    if (!j.at("reproj_error").is_null()) r.reproj_error = j.at("reproj_error").get<double>();
    r.method = j.at("method").get<std::string>();
    return r;
  });
}

}  // namespace vpp
