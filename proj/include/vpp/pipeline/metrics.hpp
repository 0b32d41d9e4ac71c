#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"
#include "vpp/interchange.hpp"

namespace vpp {

/// Intersection over union of two simple quads, by exact polygon clipping.
inline double quad_iou(const Quad& a, const Quad& b) {
  if (!is_simple(a) || !is_simple(b)) throw Error(ErrorCode::degenerate_quad, "IoU needs simple quads");
  const double inter = quad_intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

/// Mean over the four corresponding edges of the minor angle between them,
/// in degrees.
inline double angle_deviation(const Quad& a, const Quad& b) {
  double total = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2 ea = a[(i + 1) % 4] - a[i];
    const Point2 eb = b[(i + 1) % 4] - b[i];
    if (norm(ea) == 0 || norm(eb) == 0) throw Error(ErrorCode::degenerate_quad, "quad has a zero-length edge");
    double d = std::abs(std::atan2(ea.y, ea.x) - std::atan2(eb.y, eb.x)) * 180.0 / std::numbers::pi;
    d = std::fmod(d, 180.0);
    total += std::min(d, 180.0 - d);
  }
  return total / 4.0;
}

/// What report_metrics needs from one frame.
struct FrameOutcome {
  int frame = 0;
  bool is_kitchen = false;
  std::optional<Quad> quad;
  std::optional<double> reproj_error;
  std::map<std::string, double> stage_ms;
};

struct MetricsReport {
  std::size_t frames = 0;
  std::size_t kitchen_frames = 0;
  std::size_t placed_frames = 0;
  std::size_t gt_frames = 0;
  std::size_t gt_overlap = 0;
  double overlap_threshold = 0;
  std::optional<double> mean_iou;
  std::optional<double> mean_angle_deviation;
  std::optional<double> mean_reproj_error;
  /// Frames per second if each stage ran alone, plus "total".
  std::map<std::string, double> fps;

  /// `with_fps` false drops the wall-clock part, leaving a reproducible record.
  json to_json(bool with_fps = true) const {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json f = json::object();
    for (const auto& [k, v] : fps) f[k] = v;
    json out = {{"frames", frames},
            {"kitchen_frames", kitchen_frames},
            {"placed_frames", placed_frames},
            {"gt_frames", gt_frames},
            {"gt_overlap", gt_overlap},
            {"overlap_threshold", overlap_threshold},
            {"mean_iou", opt(mean_iou)},
            {"mean_angle_deviation", opt(mean_angle_deviation)},
            {"mean_reproj_error", opt(mean_reproj_error)}};
    if (with_fps) out["fps"] = f;
    return out;
  }
};

/// Aggregates per-frame outcomes. A ground-truth frame counts as overlapped
/// when the predicted quad's IoU with it exceeds `overlap_threshold`; frames
/// with ground truth but no prediction score IoU 0 and are excluded from the
/// angle mean.
inline MetricsReport report_metrics(const std::vector<FrameOutcome>& results,
                                    const std::map<int, Quad>& ground_truth = {},
                                    double overlap_threshold = 0.0) {
  MetricsReport m;
  m.overlap_threshold = overlap_threshold;
  m.frames = results.size();
  double iou_sum = 0, ang_sum = 0, rep_sum = 0;
  std::size_t ang_n = 0, rep_n = 0;
  std::map<std::string, double> stage_total;
  for (const auto& r : results) {
    m.kitchen_frames += r.is_kitchen;
    m.placed_frames += r.quad.has_value();
    if (r.reproj_error) {
      rep_sum += *r.reproj_error;
      ++rep_n;
    }
    for (const auto& [k, v] : r.stage_ms) stage_total[k] += v;
    const auto gt = ground_truth.find(r.frame);
    if (gt == ground_truth.end()) continue;
    ++m.gt_frames;
    if (!r.quad) continue;
    const double iou = quad_iou(*r.quad, gt->second);
    iou_sum += iou;
    m.gt_overlap += iou > overlap_threshold;
    ang_sum += angle_deviation(*r.quad, gt->second);
    ++ang_n;
  }
  if (m.gt_frames) m.mean_iou = iou_sum / static_cast<double>(m.gt_frames);
  if (ang_n) m.mean_angle_deviation = ang_sum / static_cast<double>(ang_n);
  if (rep_n) m.mean_reproj_error = rep_sum / static_cast<double>(rep_n);
  for (const auto& [k, ms] : stage_total) {
    if (ms > 0) m.fps[k] = 1000.0 * static_cast<double>(results.size()) / ms;
  }
  return m;
}

/// Ground truth file: {"frames":[{"frame":0,"quad":[[x,y],[x,y],[x,y],[x,y]]}, ...]}.
inline std::map<int, Quad> ground_truth_from_json(const json& j) {
  return detail::with_format_check("ground truth", [&] {
    std::map<int, Quad> out;
    for (const auto& f : j.at("frames")) out[f.at("frame").get<int>()] = detail::quad_from_json(f.at("quad"));
    return out;
  });
}

}  // namespace vpp
