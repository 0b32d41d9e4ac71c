#pragma once

// Empty-space proposals: wall/plane intersection, blob extraction and
// perspective alignment of blob boxes against nearby wall lines.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "vpp/geometry.hpp"
#include "vpp/image_io.hpp"
#include "vpp/imaging.hpp"

namespace vpp {

struct RegionProposal {
  Rect bbox;
  int blob_area = 0;
  std::optional<Quad> aligned;

  /// The aligned quad when present, else the box itself.
  Quad quad() const { return aligned ? *aligned : rect_to_quad(bbox); }
};

struct Component {
  int id = 0;
  /// Linear pixel indices (y * width + x) in scan order.
  std::vector<int> pixels;
  Rect bbox;

  int area() const { return static_cast<int>(pixels.size()); }
};

/// True where the wall mask is set and the plane label equals `plane_id`.
inline BinaryMask empty_space_mask(const BinaryMask& wall, const LabelMap& plane, int plane_id) {
  if (!wall.same_size(plane.width(), plane.height())) {
    throw Error(ErrorCode::dimension_mismatch, "wall mask and plane map differ in size");
  }
  BinaryMask out(wall.width(), wall.height());
  auto w = wall.bits();
  auto p = plane.data();
  auto o = out.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (w[i] && p[i] == plane_id) ? 1 : 0;
  return out;
}

/// Plane label with the largest overlap with the wall mask (lowest id on ties).
inline std::optional<int> select_plane_id(const BinaryMask& wall, const LabelMap& plane) {
  if (!wall.same_size(plane.width(), plane.height())) {
    throw Error(ErrorCode::dimension_mismatch, "wall mask and plane map differ in size");
  }
  std::map<int, std::size_t> overlap;
  auto w = wall.bits();
  auto p = plane.data();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]) ++overlap[p[i]];
  std::optional<int> best;
  std::size_t best_count = 0;
  for (const auto& [id, count] : overlap) {
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

/// 8-connected components ordered by descending area, then by the scan
/// position of their first pixel. Ids are positions in that order.
inline std::vector<Component> connected_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Component> comps;
  std::vector<int> queue;
  auto bits = mask.bits();

  for (int start = 0; start < w * h; ++start) {
    if (!bits[start] || label[start] >= 0) continue;
    const int cid = static_cast<int>(comps.size());
    Component c;
    queue.assign(1, start);
    label[start] = cid;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int i = queue[head];
      const int x = i % w, y = i / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int j = ny * w + nx;
          if (bits[j] && label[j] < 0) {
            label[j] = cid;
            queue.push_back(j);
          }
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int i : queue) {
      x0 = std::min(x0, i % w);
      x1 = std::max(x1, i % w);
      y0 = std::min(y0, i / w);
      y1 = std::max(y1, i / w);
    }
    c.pixels = queue;
    c.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    comps.push_back(std::move(c));
  }
  // Components are discovered in scan order of their first pixel, so a
  // stable sort on area alone yields the required tie-break.
  std::stable_sort(comps.begin(), comps.end(),
                   [](const Component& a, const Component& b) { return a.area() > b.area(); });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].id = static_cast<int>(i);
  return comps;
}

struct RegionFilters {
  int min_area = 1;
  double min_fill = 0.6;
  double min_aspect = 0.25;
  double max_aspect = 4.0;

  /// min_area = 0.5% of the frame.
  static RegionFilters for_frame(int width, int height) {
    RegionFilters f;
    f.min_area = std::max(1, static_cast<int>(std::lround(0.005 * width * height)));
    return f;
  }
};

/// Blobs passing the area, fill-ratio and aspect filters, largest first.
inline std::vector<RegionProposal> propose_regions(const BinaryMask& mask,
                                                   const RegionFilters& f) {
  if (f.min_area < 1 || !(f.min_fill > 0 && f.min_fill <= 1)) {
    throw Error(ErrorCode::config_error, "invalid region filters");
  }
  std::vector<RegionProposal> out;
  for (const auto& c : connected_components(mask)) {
    const double fill = static_cast<double>(c.area()) / c.bbox.area();
    const double aspect = static_cast<double>(c.bbox.w) / c.bbox.h;
    if (c.area() < f.min_area || fill < f.min_fill) continue;
    if (aspect < f.min_aspect || aspect > f.max_aspect) continue;
    out.push_back({c.bbox, c.area(), std::nullopt});
  }
  return out;
}

struct AlignOptions {
  double angle_tol_deg = 10;
  LineDistance distance_mode = LineDistance::endpoint;
  /// Lines farther than this multiple of the box diagonal are ignored.
  double budget_factor = 1.5;
};

namespace detail {

inline const LineSegment* closest_line(const LineSegmentSet& lines, Orientation want,
                                       Point2 center, const AlignOptions& opt, double budget) {
  const LineSegment* best = nullptr;
  double best_d = budget;
  for (const auto& seg : lines) {
    if (seg.p1 == seg.p2) continue;
    if (classify_line(seg, opt.angle_tol_deg) != want) continue;
    const double d = region_line_distance(center, seg, opt.distance_mode);
    if (d <= best_d) {
      if (best && d == best_d) continue;
      best = &seg;
      best_d = d;
    }
  }
  return best;
}

}  // namespace detail

/// Shears the proposal box so its top/bottom edges follow the closest
/// horizontal line and its left/right edges follow the closest vertical one.
/// Each edge keeps its midpoint; its two corners move to signed distance
/// +-half-length along the adopted slope. A corner's final position adds the
/// displacements from its horizontal and its vertical edge.
inline Quad align_region(const RegionProposal& r, const LineSegmentSet& lines,
                         const AlignOptions& opt = {}) {
  const Quad box = rect_to_quad(r.bbox);
  const Point2 center = r.bbox.center();
  const double half_w = (r.bbox.w - 1) / 2.0;
  const double half_h = (r.bbox.h - 1) / 2.0;
  const double budget = opt.budget_factor * std::hypot(r.bbox.w, r.bbox.h);

  std::array<Point2, 4> shift{};
  if (const auto* hl = detail::closest_line(lines, Orientation::horizontal, center, opt, budget)) {
    const Point2 d = hl->p2 - hl->p1;
    const double m = d.y / d.x;
    const Point2 top{center.x, box[0].y}, bottom{center.x, box[3].y};
    shift[0] = shift[0] + (adjust_point(top, m, -half_w) - box[0]);
    shift[1] = shift[1] + (adjust_point(top, m, half_w) - box[1]);
    shift[2] = shift[2] + (adjust_point(bottom, m, half_w) - box[2]);
    shift[3] = shift[3] + (adjust_point(bottom, m, -half_w) - box[3]);
  }
  if (const auto* vl = detail::closest_line(lines, Orientation::vertical, center, opt, budget)) {
    const Point2 d = vl->p2 - vl->p1;
    const double m = d.x / d.y;
    const Point2 left{box[0].x, center.y}, right{box[1].x, center.y};
    shift[0] = shift[0] + (adjust_point_swapped(left, m, -half_h) - box[0]);
    shift[3] = shift[3] + (adjust_point_swapped(left, m, half_h) - box[3]);
    shift[1] = shift[1] + (adjust_point_swapped(right, m, -half_h) - box[1]);
    shift[2] = shift[2] + (adjust_point_swapped(right, m, half_h) - box[2]);
  }
  Quad out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = box[i] + shift[i];

  const double ratio = box.area() > 0 ? out.area() / box.area() : 1.0;
  if (box.area() > 0 && (!is_simple(out) || ratio < 0.5 || ratio > 2.0)) {
    throw Error(ErrorCode::degenerate_output, "aligned quad is not a usable region");
  }
  return out;
}

/// align_region, falling back to the axis-aligned box on degenerate output.
inline Quad align_region_or_box(const RegionProposal& r, const LineSegmentSet& lines,
                                const AlignOptions& opt = {}) {
  try {
    return align_region(r, lines, opt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_output) throw;
    return rect_to_quad(r.bbox);
  }
}

}  // namespace vpp
