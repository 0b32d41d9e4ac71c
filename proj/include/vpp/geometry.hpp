#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "vpp/error.hpp"

namespace vpp {

struct Point2 {
  double x = 0;
  double y = 0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

enum class Orientation { vertical, horizontal, other };

struct LineSegment {
  Point2 p1;
  Point2 p2;
  Orientation orientation = Orientation::other;

  double length() const { return distance(p1, p2); }
  Point2 midpoint() const { return 0.5 * (p1 + p2); }
};

using LineSegmentSet = std::vector<LineSegment>;

/// Angle of the segment against the x axis, folded into [0, 90] degrees.
inline double axis_angle_deg(const LineSegment& seg) {
  const Point2 d = seg.p2 - seg.p1;
  if (d.x == 0 && d.y == 0) throw Error(ErrorCode::degenerate_segment, "segment endpoints coincide");
  return std::atan2(std::abs(d.y), std::abs(d.x)) * 180.0 / std::numbers::pi;
}

inline Orientation classify_line(const LineSegment& seg, double angle_tol_deg) {
  if (!(angle_tol_deg > 0 && angle_tol_deg < 45)) {
    throw Error(ErrorCode::config_error, "angle tolerance must lie in (0, 45) degrees");
  }
  const double angle = axis_angle_deg(seg);
  if (angle <= angle_tol_deg) return Orientation::horizontal;
  if (90.0 - angle <= angle_tol_deg) return Orientation::vertical;
  return Orientation::other;
}

enum class LineDistance { endpoint, segment };

/// Endpoint mode: min distance from `center` to either endpoint.
/// Segment mode: Euclidean distance to the closest point on the segment.
inline double region_line_distance(Point2 center, const LineSegment& seg,
                                   LineDistance mode = LineDistance::endpoint) {
  if (mode == LineDistance::endpoint) {
    return std::min(distance(center, seg.p1), distance(center, seg.p2));
  }
  const Point2 d = seg.p2 - seg.p1;
  const double len2 = dot(d, d);
  if (len2 == 0) return distance(center, seg.p1);
  const double t = std::clamp(dot(center - seg.p1, d) / len2, 0.0, 1.0);
  return distance(center, seg.p1 + t * d);
}

/// Moves `p` a signed distance `d` along a line of slope `m` (dy/dx):
/// r = sqrt(1 + m^2), result = (x + d/r, y + d*m/r).
inline Point2 adjust_point(Point2 p, double m, double d) {
  const double r = std::sqrt(1.0 + m * m);
  return {p.x + d / r, p.y + d * m / r};
}

/// Same as adjust_point with the axes swapped; `m` is dx/dy, so a
/// perfectly vertical line has m = 0.
inline Point2 adjust_point_swapped(Point2 p, double m, double d) {
  const Point2 q = adjust_point({p.y, p.x}, m, d);
  return {q.y, q.x};
}

/// Four corners ordered top-left, top-right, bottom-right, bottom-left.
struct Quad {
  std::array<Point2, 4> corners{};

  Point2& operator[](std::size_t i) { return corners[i]; }
  const Point2& operator[](std::size_t i) const { return corners[i]; }

  /// Shoelace area; positive for the TL,TR,BR,BL order in y-down image space.
  double signed_area() const {
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i) s += cross(corners[i], corners[(i + 1) % 4]);
    return 0.5 * s;
  }
  double area() const { return std::abs(signed_area()); }

  Point2 centroid() const {
    Point2 c;
    for (const auto& p : corners) c = c + p;
    return 0.25 * c;
  }

  friend bool operator==(const Quad&, const Quad&) = default;
};

/// Axis-aligned rectangle in integer pixels.
struct Rect {
  int x = 0, y = 0, w = 0, h = 0;

  int area() const { return w * h; }
  Point2 center() const { return {x + (w - 1) / 2.0, y + (h - 1) / 2.0}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Quad through the centers of a rectangle's corner pixels.
inline Quad rect_to_quad(const Rect& r) {
  const double x0 = r.x, y0 = r.y, x1 = r.x + r.w - 1, y1 = r.y + r.h - 1;
  return Quad{{Point2{x0, y0}, Point2{x1, y0}, Point2{x1, y1}, Point2{x0, y1}}};
}

namespace detail {

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  auto orient = [](Point2 p, Point2 q, Point2 r) {
    const double v = cross(q - p, r - p);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace detail

/// Non-self-intersecting with non-zero area.
inline bool is_simple(const Quad& q) {
  const auto& c = q.corners;
  if (!(q.area() > 1e-12)) return false;
  if (detail::segments_intersect(c[0], c[1], c[2], c[3])) return false;
  if (detail::segments_intersect(c[1], c[2], c[3], c[0])) return false;
  return true;
}

/// True if any three of the four points are (numerically) collinear.
inline bool has_collinear_triple(std::span<const Point2, 4> p, double rel_tol = 1e-9) {
  double scale = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) scale = std::max(scale, distance(p[i], p[j]));
  if (scale == 0) return true;
  static constexpr int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : triples) {
    const double a = cross(p[t[1]] - p[t[0]], p[t[2]] - p[t[0]]);
    if (std::abs(a) <= rel_tol * scale * scale) return true;
  }
  return false;
}

/// 3x3 projective transform, kept normalized so m(2,2) = 1 when nonzero.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m) : m_(normalized(m)) {}

  static Homography translation(double tx, double ty) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = tx;
    m(1, 2) = ty;
    return Homography(m);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  double determinant() const { return m_.determinant(); }
  bool invertible() const { return std::abs(determinant()) > 1e-12; }

  Homography inverse() const {
    if (!invertible()) throw Error(ErrorCode::degenerate_homography, "singular homography");
    return Homography(m_.inverse());
  }

  /// `*this` applied after `rhs`.
  Homography operator*(const Homography& rhs) const { return Homography(m_ * rhs.m_); }

  static Eigen::Matrix3d normalized(const Eigen::Matrix3d& m) {
    if (std::abs(m(2, 2)) > 1e-15) return m / m(2, 2);
    const double n = m.norm();
    return n > 0 ? Eigen::Matrix3d(m / n) : m;
  }

 private:
  Eigen::Matrix3d m_;
};

inline Point2 apply_homography(const Homography& h, Point2 p) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < 1e-12) throw Error(ErrorCode::point_at_infinity, "point maps to infinity");
  return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w,
          (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

/// Similarity that moves the centroid to the origin with mean distance sqrt(2).
struct Normalizer {
  double cx = 0, cy = 0, s = 1;

  static std::optional<Normalizer> fit(std::span<const Point2> pts,
                                       std::span<const double> weights = {}) {
    double wsum = 0, cx = 0, cy = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      cx += w * pts[i].x;
      cy += w * pts[i].y;
      wsum += w;
    }
    if (!(wsum > 0)) return std::nullopt;
    cx /= wsum;
    cy /= wsum;
    double mean = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      mean += w * std::hypot(pts[i].x - cx, pts[i].y - cy);
    }
    mean /= wsum;
    if (!(mean > 1e-12)) return std::nullopt;
    return Normalizer{cx, cy, std::sqrt(2.0) / mean};
  }

  Point2 apply(Point2 p) const { return {s * (p.x - cx), s * (p.y - cy)}; }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
  }
};

/// Normalized DLT. With exactly four correspondences this is the exact
/// solution; with more it minimizes the (optionally weighted) algebraic
/// error. Returns nullopt when the system is degenerate.
inline std::optional<Homography> fit_homography_dlt(std::span<const Point2> src,
                                                    std::span<const Point2> dst,
                                                    std::span<const double> weights = {}) {
  const std::size_t n = src.size();
  if (n < 4 || dst.size() != n || (!weights.empty() && weights.size() != n)) return std::nullopt;
  const auto ns = Normalizer::fit(src, weights);
  const auto nd = Normalizer::fit(dst, weights);
  if (!ns || !nd) return std::nullopt;

  const Eigen::Index rows = static_cast<Eigen::Index>(std::max<std::size_t>(2 * n, 9));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : std::sqrt(weights[i]);
    const Point2 p = ns->apply(src[i]);
    const Point2 q = nd->apply(dst[i]);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << 0, 0, 0, -p.x, -p.y, -1, q.y * p.x, q.y * p.y, q.y;
    a.row(r + 1) << p.x, p.y, 1, 0, 0, 0, -q.x * p.x, -q.x * p.y, -q.x;
    a.row(r) *= w;
    a.row(r + 1) *= w;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A rank below 8 leaves more than one solution.
  if (sv(7) <= 1e-12 * std::max(sv(0), 1e-300)) return std::nullopt;
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d m = nd->matrix().inverse() * hn * ns->matrix();
  if (!std::isfinite(m.sum())) return std::nullopt;
  Homography out(m);
  if (!out.invertible()) return std::nullopt;
  return out;
}

/// Exact transform taking each corner of `src` onto the same corner of `dst`.
inline Homography homography_from_quads(const Quad& src, const Quad& dst) {
  if (has_collinear_triple(src.corners) || has_collinear_triple(dst.corners)) {
    throw Error(ErrorCode::degenerate_quad, "quad has three collinear corners");
  }
  auto h = fit_homography_dlt(src.corners, dst.corners);
  if (!h) throw Error(ErrorCode::degenerate_quad, "singular 4-point system");
  return *h;
}

inline Quad transform_quad(const Homography& h, const Quad& q) {
  Quad out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = apply_homography(h, q[i]);
  return out;
}

// ---- polygon area and clipping -------------------------------------------

inline double polygon_signed_area(std::span<const Point2> poly) {
  double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

/// Sutherland-Hodgman clip of `subject` against a convex, positively
/// oriented `clip` polygon.
inline std::vector<Point2> clip_convex(std::vector<Point2> subject, std::span<const Point2> clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2 a = clip[e];
    const Point2 b = clip[(e + 1) % clip.size()];
    auto side = [&](Point2 p) { return cross(b - a, p - a); };
    std::vector<Point2> out;
    out.reserve(subject.size() + 2);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2 cur = subject[i];
      const Point2 prev = subject[(i + subject.size() - 1) % subject.size()];
      const double sc = side(cur), sp = side(prev);
      if (sc >= 0) {
        if (sp < 0) out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
        out.push_back(cur);
      } else if (sp >= 0) {
        out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

/// Splits a simple quad into two positively oriented triangles along an
/// interior diagonal.
inline std::array<std::array<Point2, 3>, 2> quad_triangles(const Quad& q) {
  Quad p = q;
  if (p.signed_area() < 0) std::swap(p[1], p[3]);
  const auto& c = p.corners;
  // Diagonal 0-2 is interior iff corners 1 and 3 lie on opposite sides.
  const double s1 = cross(c[2] - c[0], c[1] - c[0]);
  const double s3 = cross(c[2] - c[0], c[3] - c[0]);
  auto orient = [](std::array<Point2, 3> t) {
    if (cross(t[1] - t[0], t[2] - t[0]) < 0) std::swap(t[1], t[2]);
    return t;
  };
  if (s1 * s3 < 0) {
    return {orient({c[0], c[1], c[2]}), orient({c[0], c[2], c[3]})};
  }
  return {orient({c[1], c[2], c[3]}), orient({c[1], c[3], c[0]})};
}

/// Exact intersection area of two simple quads.
inline double quad_intersection_area(const Quad& a, const Quad& b) {
  double total = 0;
  for (const auto& ta : quad_triangles(a)) {
    for (const auto& tb : quad_triangles(b)) {
      const auto poly = clip_convex({ta.begin(), ta.end()}, tb);
      if (poly.size() >= 3) total += std::abs(polygon_signed_area(poly));
    }
  }
  return total;
}

}  // namespace vpp
