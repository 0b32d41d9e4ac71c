#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpp/compositor.hpp"
#include "vpp/image_io.hpp"
#include "vpp/interchange.hpp"
#include "vpp/line_detection.hpp"
#include "vpp/photometric.hpp"
#include "vpp/pipeline/config.hpp"
#include "vpp/pipeline/metrics.hpp"
#include "vpp/regions.hpp"
#include "vpp/scene.hpp"
#include "vpp/tracker/tracking.hpp"

namespace vpp {

struct FrameArtifacts {
  std::optional<BinaryMask> wall;
  std::optional<LabelMap> planes;
  std::optional<BinaryMask> human;
  std::optional<std::vector<Detection>> detections;
  std::optional<LineSegmentSet> lines;
};

/// Loads whatever artifacts exist for `stem`; rasters must match the frame.
inline FrameArtifacts load_frame_artifacts(const PipelineConfig& c, const std::string& stem, int w,
                                           int h) {
  FrameArtifacts a;
  auto check = [&](int aw, int ah, const char* what) {
    if (aw != w || ah != h) {
      throw Error(ErrorCode::dimension_mismatch, std::string(what) + " of " + stem + " does not match the frame");
    }
  };
  if (c.masks_dir) {
    const fs::path wall = *c.masks_dir / (stem + ".wall.png");
    const fs::path planes = *c.masks_dir / (stem + ".planes.png");
    const fs::path human = *c.masks_dir / (stem + ".human.png");
    if (fs::exists(wall)) {
      a.wall = load_mask(wall);
      check(a.wall->width(), a.wall->height(), "wall mask");
    }
    if (fs::exists(planes)) {
      a.planes = load_label_map(planes);
      check(a.planes->width(), a.planes->height(), "plane map");
    }
    if (fs::exists(human)) {
      a.human = load_mask(human);
      check(a.human->width(), a.human->height(), "human mask");
    }
  }
  if (c.detections_dir) {
    const fs::path p = *c.detections_dir / (stem + ".detections.json");
    if (fs::exists(p)) a.detections = load_detections(p, w, h);
  }
  if (c.lines_dir) {
    const fs::path p = *c.lines_dir / (stem + ".lines.json");
    if (fs::exists(p)) a.lines = load_lines(p);
  }
  return a;
}

struct FrameResult {
  int index = 0;
  std::string stem;
  bool is_kitchen = false;
  std::optional<Quad> quad;
  /// "detected", "tracked" or "none".
  std::string placement = "none";
  std::string light_method;
  std::string track_method;
  std::optional<double> reproj_error;
  std::size_t n_matches = 0;
  std::size_t n_inliers = 0;
  bool degenerate_track = false;
  std::vector<std::string> notes;
  std::optional<std::string> error;
  std::map<std::string, double> timing_ms;
  double frame_ms = 0;

  /// Everything except timings, so records are reproducible byte for byte.
  json to_json() const {
    json notes_j = json::array();
    for (const auto& n : notes) notes_j.push_back(n);
    return {{"frame", index},
            {"stem", stem},
            {"is_kitchen", is_kitchen},
            {"quad", quad ? detail::quad_json(*quad) : json(nullptr)},
            {"placement", placement},
            {"light_method", light_method},
            {"track_method", track_method},
            {"reproj_error", reproj_error ? json(*reproj_error) : json(nullptr)},
            {"n_matches", n_matches},
            {"n_inliers", n_inliers},
            {"degenerate_track", degenerate_track},
            {"notes", notes_j},
            {"error", error ? json(*error) : json(nullptr)}};
  }

  FrameOutcome outcome() const { return {index, is_kitchen, quad, reproj_error, timing_ms}; }
};

/// Frame files (.png, .ppm) in name order.
inline std::vector<fs::path> list_frames(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (!e.is_regular_file()) continue;
    auto ext = to_lower(e.path().extension().string());
    if (ext == ".png" || ext == ".ppm") out.push_back(e.path());
  }
  if (ec) throw Error(ErrorCode::io_error, "cannot list " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string frame_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.png", index);
  return buf;
}

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink), last_(now()) {}
  void lap(const char* stage) {
    const auto t = now();
    sink_[stage] += std::chrono::duration<double, std::milli>(t - last_).count();
    last_ = t;
  }

 private:
  static std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_;
};

/// Largest aligned proposal in the frame's empty-space mask, if any.
inline std::optional<Quad> detect_placement(const PipelineConfig& c, const FrameArtifacts& a,
                                            const ImageGray& gray, FrameResult& res) {
  if (!a.wall) {
    res.notes.push_back("no wall mask; detection skipped");
    return std::nullopt;
  }
  BinaryMask space = *a.wall;
  if (a.planes) {
    if (const auto id = select_plane_id(*a.wall, *a.planes)) {
      space = empty_space_mask(*a.wall, *a.planes, *id);
    } else {
      res.notes.push_back("no plane overlaps the wall; wall mask used alone");
    }
  }
  RegionFilters f = c.filters;
  f.min_area = c.min_region_area.value_or(RegionFilters::for_frame(gray.width(), gray.height()).min_area);
  const auto props = propose_regions(space, f);
  if (props.empty()) {
    res.notes.push_back("no region passed the filters");
    return std::nullopt;
  }
  LineSegmentSet lines;
  if (a.lines) {
    lines = *a.lines;
  } else if (c.detect_lines) {
    lines = detect_line_segments(gray, c.line_detection);
  }
  return align_region_or_box(props.front(), lines, c.align);
}

}  // namespace detail

struct PipelineRun {
  std::vector<FrameResult> results;
  MetricsReport metrics;
};

/// Runs the whole sequence. Wall-clock data goes only to timings.jsonl and
/// throughput.json. Per-frame failures are recorded in the results
/// and the frame is written unmodified.
inline PipelineRun run_pipeline(const PipelineConfig& c) {
  c.validate();
  const auto frames = list_frames(c.frames_dir);
  if (frames.empty()) throw Error(ErrorCode::empty_sequence, "no frames in " + c.frames_dir.string());
  const ImageRGB ad = load_image(c.ad_path);
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + c.output_dir.string());

  std::string results_text, trace_text, timings_text;
  PipelineRun run;

  std::optional<Quad> quad;
  std::optional<Features> prev_features;
  int last_detect = 0;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameResult res;
    res.index = static_cast<int>(i);
    res.stem = frames[i].stem().string();
    res.light_method = std::string(to_string(c.light));
    res.track_method = c.tracker.method_tag();
    const auto t0 = std::chrono::steady_clock::now();
    detail::StageClock clock(res.timing_ms);

    const ImageRGB frame = load_image(frames[i]);
    ImageRGB output = frame;
    clock.lap("load");
    try {
      const FrameArtifacts art = load_frame_artifacts(c, res.stem, frame.width(), frame.height());
      clock.lap("load");

      if (art.detections) {
        res.is_kitchen = classify_scene(*art.detections, c.scene).is_kitchen;
      } else {
        res.is_kitchen = true;
        res.notes.push_back("no detections; scene gate skipped");
      }
      clock.lap("scene");

      if (!res.is_kitchen) {
        quad.reset();
        prev_features.reset();
      } else {
        const ImageGray gray = to_gray(frame);
        const Features feats =
            extract_features(gray, art.human ? &*art.human : nullptr, c.tracker);
        clock.lap("features");

        std::optional<Quad> tracked;
        std::optional<Homography> motion;
        if (quad && prev_features) {
          try {
            const FrameMotion m = estimate_motion(*prev_features, feats, c.tracker);
            res.n_matches = m.n_matches;
            res.n_inliers = m.n_inliers;
            tracked = track_quad(*quad, m.h);
            motion = m.h;
          } catch (const Error& e) {
            res.degenerate_track = e.code() == ErrorCode::degenerate_track;
            res.notes.push_back("tracking failed: " + std::string(to_string(e.code())));
          }
        }
        clock.lap("track");

        const bool due = !tracked || res.index - last_detect >= c.redetect_interval;
        std::optional<Quad> detected;
        if (due) detected = detail::detect_placement(c, art, gray, res);
        clock.lap("detect");

        if (tracked && detected && motion) {
          res.reproj_error = reprojection_error(*motion, *quad, *detected);
        }
        if (tracked && detected) {
          last_detect = res.index;
          if (quad_iou(*tracked, *detected) < c.sticky_iou) {
            quad = detected;
            res.placement = "detected";
          } else {
            quad = tracked;
            res.placement = "tracked";
          }
        } else if (tracked) {
          quad = tracked;
          res.placement = "tracked";
        } else if (detected) {
          quad = detected;
          last_detect = res.index;
          res.placement = "detected";
        } else {
          quad.reset();
        }
        prev_features = feats;

        if (quad) {
          const auto window = quad_neighborhood(*quad, frame.width(), frame.height());
          const ImageRGB relit =
              window ? relight(ad, crop(frame, *window), c.light, c.brightness_alpha) : ad;
          clock.lap("relight");
          output = place_ad(frame, relit, *quad, art.human, c.occlusion_dilation);
          clock.lap("render");
          res.quad = quad;
        }
      }
    } catch (const Error& e) {
      res.error = e.what();
      res.quad.reset();
      res.placement = "none";
      quad.reset();
      prev_features.reset();
      output = frame;
    }

    if (c.write_frames) save_png(c.output_dir / frame_file_name(res.index), output);
    clock.lap("write");
    res.frame_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    TraceRecord tr{res.index, res.quad, res.n_matches, res.n_inliers, res.reproj_error, res.track_method};
    results_text += res.to_json().dump() + "\n";
    trace_text += trace_to_json(tr).dump() + "\n";
    json tj = json::object();
    for (const auto& [k, v] : res.timing_ms) tj[k] = v;
    timings_text += json{{"frame", res.index}, {"stages_ms", tj}, {"frame_ms", res.frame_ms}}.dump() + "\n";
    run.results.push_back(std::move(res));
  }

  std::vector<FrameOutcome> outcomes;
  for (const auto& r : run.results) {
    outcomes.push_back(r.outcome());
    outcomes.back().stage_ms["total"] = r.frame_ms;
  }
  run.metrics = report_metrics(outcomes);
  write_text_file(c.output_dir / "results.jsonl", results_text);
  write_text_file(c.output_dir / "trace.jsonl", trace_text);
  write_text_file(c.output_dir / "timings.jsonl", timings_text);
  write_text_file(c.output_dir / "metrics.json", run.metrics.to_json(false).dump(2) + "\n");
  json fps = json::object();
  for (const auto& [k, v] : run.metrics.fps) fps[k] = v;
  write_text_file(c.output_dir / "throughput.json", json{{"fps", fps}}.dump(2) + "\n");
  return run;
}

}  // namespace vpp
