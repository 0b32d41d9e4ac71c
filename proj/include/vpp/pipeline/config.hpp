#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "vpp/error.hpp"
#include "vpp/interchange.hpp"
#include "vpp/line_detection.hpp"
#include "vpp/photometric.hpp"
#include "vpp/regions.hpp"
#include "vpp/scene.hpp"
#include "vpp/tracker/tracking.hpp"

namespace vpp {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path frames_dir;
  fs::path ad_path;
  /// Directories holding per-frame artifacts named by frame stem:
  /// <stem>.wall.png, <stem>.planes.png, <stem>.human.png in masks_dir,
  /// <stem>.detections.json and <stem>.lines.json in the other two.
  std::optional<fs::path> masks_dir;
  std::optional<fs::path> detections_dir;
  std::optional<fs::path> lines_dir;
  fs::path output_dir;

  LightMethod light = LightMethod::lab_light;
  double brightness_alpha = 1.0;
  SceneRule scene;
  /// nullopt: 0.5% of the frame area.
  std::optional<int> min_region_area;
  RegionFilters filters;
  AlignOptions align;
  /// Classical line detection when no lines file is supplied.
  bool detect_lines = true;
  LineDetectionParams line_detection;
  TrackerParams tracker;
  int redetect_interval = 30;
  /// A fresh detection replaces the tracked quad below this IoU.
  double sticky_iou = 0.3;
  int occlusion_dilation = 2;
  std::uint64_t seed = 0;
  bool write_frames = true;

  void validate() const;
};

namespace detail {

/// Reads one JSON object, rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw Error(ErrorCode::config_error, where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::config_error, where_ + "." + key + " has the wrong type");
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    T v{};
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    get(key, v);
    out = v;
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(ErrorCode::config_error, "unknown key " + where_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// Reads the "tracker" object onto `t`.
inline void parse_tracker(const json& j, TrackerParams& t) {
  detail::ObjectReader s(j, "tracker");
  std::string matcher = std::string(to_string(t.matcher));
  std::string estimator = std::string(to_string(t.estimator));
  s.get("matcher", matcher);
  s.get("estimator", estimator);
  t.matcher = parse_matcher(matcher);
  t.estimator = parse_estimator(estimator);
  s.get("fast_threshold", t.fast.threshold);
  s.get("max_keypoints", t.fast.max_keypoints);
  s.get("nms_radius", t.fast.nms_radius);
  s.get("mask_margin", t.mask_margin);
  s.get("ransac_threshold", t.ransac.threshold);
  double confidence = t.ransac.confidence;
  int max_iters = t.ransac.max_iters;
  s.get("confidence", confidence);
  s.get("max_iters", max_iters);
  t.ransac.confidence = t.magsac.confidence = confidence;
  t.ransac.max_iters = t.magsac.max_iters = max_iters;
  s.get("max_sigma", t.magsac.max_sigma);
  s.get("partitions", t.magsac.partitions);
  s.get("fginn_ratio", t.fginn.ratio);
  s.get("fginn_min_geom_dist", t.fginn.min_geom_dist);
  s.get("gms_grid", t.gms.grid);
  s.get("gms_alpha", t.gms.alpha);
  s.finish();
}

inline void validate_tracker(const TrackerParams& t) {
  if (t.fast.threshold < 1 || t.fast.max_keypoints < 1 || t.fast.nms_radius < 0 || t.mask_margin < 0) {
    throw Error(ErrorCode::config_error, "invalid keypoint parameters");
  }
  if (!(t.ransac.threshold > 0) || !(t.ransac.confidence > 0 && t.ransac.confidence < 1) ||
      t.ransac.max_iters < 1 || !(t.magsac.max_sigma > 0) || t.magsac.partitions < 1 ||
      t.magsac.max_iters < 1 || !(t.fginn.ratio > 0) || t.gms.grid < 1) {
    throw Error(ErrorCode::config_error, "invalid tracker parameters");
  }
}

inline void PipelineConfig::validate() const {
  auto require_dir = [](const fs::path& p, const char* what) {
    if (!fs::is_directory(p)) throw Error(ErrorCode::config_error, std::string(what) + " not found: " + p.string());
  };
  require_dir(frames_dir, "frames_dir");
  if (!fs::is_regular_file(ad_path)) throw Error(ErrorCode::config_error, "ad not found: " + ad_path.string());
  if (masks_dir) require_dir(*masks_dir, "masks_dir");
  if (detections_dir) require_dir(*detections_dir, "detections_dir");
  if (lines_dir) require_dir(*lines_dir, "lines_dir");
  if (output_dir.empty()) throw Error(ErrorCode::config_error, "output_dir is required");
  if (redetect_interval < 1) throw Error(ErrorCode::config_error, "redetect_interval must be >= 1");
  if (!(sticky_iou >= 0 && sticky_iou <= 1)) throw Error(ErrorCode::config_error, "sticky_iou must lie in [0, 1]");
  if (occlusion_dilation < 0) throw Error(ErrorCode::config_error, "occlusion_dilation must be >= 0");
  if (min_region_area && *min_region_area < 1) throw Error(ErrorCode::config_error, "min_area must be >= 1");
  if (!(filters.min_fill > 0 && filters.min_fill <= 1) || !(filters.min_aspect > 0) ||
      filters.max_aspect < filters.min_aspect) {
    throw Error(ErrorCode::config_error, "invalid region filters");
  }
  if (!(align.angle_tol_deg > 0 && align.angle_tol_deg < 45)) {
    throw Error(ErrorCode::config_error, "align.angle_tol_deg must lie in (0, 45)");
  }
  scene.validate();
  validate_tracker(tracker);
}

/// Parses a pipeline configuration; relative paths resolve against `base`.
inline PipelineConfig parse_config(const json& j, const fs::path& base) {
  PipelineConfig c;
  detail::ObjectReader r(j, "config");
  std::string frames, ad, out;
  std::optional<std::string> masks, dets, lines;
  r.get("frames_dir", frames);
  r.get("ad", ad);
  r.get("output_dir", out);
  r.get("masks_dir", masks);
  r.get("detections_dir", dets);
  r.get("lines_dir", lines);
  if (frames.empty() || ad.empty() || out.empty()) {
    throw Error(ErrorCode::config_error, "frames_dir, ad and output_dir are required");
  }
  c.frames_dir = detail::resolve(base, frames);
  c.ad_path = detail::resolve(base, ad);
  c.output_dir = detail::resolve(base, out);
  if (masks) c.masks_dir = detail::resolve(base, *masks);
  if (dets) c.detections_dir = detail::resolve(base, *dets);
  if (lines) c.lines_dir = detail::resolve(base, *lines);

  std::string light = std::string(to_string(c.light));
  r.get("light_method", light);
  c.light = parse_light_method(light);
  r.get("brightness_alpha", c.brightness_alpha);
  r.get("redetect_interval", c.redetect_interval);
  r.get("sticky_iou", c.sticky_iou);
  r.get("occlusion_dilation", c.occlusion_dilation);
  r.get("seed", c.seed);
  r.get("write_frames", c.write_frames);

  if (r.has("scene")) {
    detail::ObjectReader s(r.at("scene"), "scene");
    std::string preset = "evaluated";
    s.get("preset", preset);
    if (preset == "evaluated") {
      c.scene = SceneRule::evaluated();
    } else if (preset == "strict") {
      c.scene = SceneRule::strict();
    } else {
      throw Error(ErrorCode::config_error, "scene.preset must be 'evaluated' or 'strict'");
    }
    s.get("person_threshold", c.scene.person_threshold);
    s.get("artifact_threshold", c.scene.artifact_threshold);
    s.get("artifact_classes", c.scene.artifact_classes);
    s.finish();
  }
  if (r.has("regions")) {
    detail::ObjectReader s(r.at("regions"), "regions");
    s.get("min_area", c.min_region_area);
    s.get("min_fill", c.filters.min_fill);
    s.get("min_aspect", c.filters.min_aspect);
    s.get("max_aspect", c.filters.max_aspect);
    s.finish();
  }
  if (r.has("align")) {
    detail::ObjectReader s(r.at("align"), "align");
    s.get("angle_tol_deg", c.align.angle_tol_deg);
    s.get("budget_factor", c.align.budget_factor);
    std::string mode = "endpoint";
    s.get("distance_mode", mode);
    if (mode == "endpoint") {
      c.align.distance_mode = LineDistance::endpoint;
    } else if (mode == "segment") {
      c.align.distance_mode = LineDistance::segment;
    } else {
      throw Error(ErrorCode::config_error, "align.distance_mode must be 'endpoint' or 'segment'");
    }
    s.finish();
  }
  if (r.has("line_detection")) {
    detail::ObjectReader s(r.at("line_detection"), "line_detection");
    auto& l = c.line_detection;
    s.get("enabled", c.detect_lines);
    s.get("canny_lo", l.canny_lo);
    s.get("canny_hi", l.canny_hi);
    s.get("hough_threshold", l.hough_threshold);
    s.get("min_len", l.min_len);
    s.get("max_gap", l.max_gap);
    s.finish();
  }
  if (r.has("tracker")) parse_tracker(r.at("tracker"), c.tracker);
  r.finish();
  c.tracker.ransac.seed = c.tracker.magsac.seed = c.seed;
  c.line_detection.seed = c.seed;
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    // An unreadable or malformed config is a configuration problem.
    throw Error(ErrorCode::config_error, e.what());
  }
  PipelineConfig c = parse_config(j, path.parent_path());
  c.validate();
  return c;
}

}  // namespace vpp
