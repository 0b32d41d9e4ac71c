#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"
#include "vpp/imaging.hpp"
#include "vpp/tracker/features.hpp"
#include "vpp/tracker/matching.hpp"
#include "vpp/tracker/robust.hpp"

namespace vpp {

/// Maps each corner through h. Fails when the result self-intersects or its
/// area changes by more than a factor of 4.
inline Quad track_quad(const Quad& prev, const Homography& h) {
  Quad out;
  try {
    out = transform_quad(h, prev);
  } catch (const Error& e) {
    throw Error(ErrorCode::degenerate_track, std::string("corner left the plane: ") + e.what());
  }
  if (!is_simple(out)) throw Error(ErrorCode::degenerate_track, "tracked quad self-intersects");
  const double ratio = out.area() / prev.area();
  if (!(ratio >= 0.25 && ratio <= 4.0)) {
    throw Error(ErrorCode::degenerate_track, "tracked quad area changed more than 4x");
  }
  return out;
}

/// Mean distance between prev's corners and curr's corners mapped back by h.
inline double reprojection_error(const Homography& h, const Quad& prev, const Quad& curr) {
  const Homography inv = h.inverse();
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) s += distance(prev[i], apply_homography(inv, curr[i]));
  return s / 4.0;
}

enum class MatcherKind { bruteforce, mutual_nn, fginn, sym_fginn_intersection, sym_fginn_union, gms };
enum class EstimatorKind { ransac, magsac };

inline std::string_view to_string(MatcherKind m) {
  switch (m) {
    case MatcherKind::bruteforce: return "bruteforce";
    case MatcherKind::mutual_nn: return "mutual_nn";
    case MatcherKind::fginn: return "fginn";
    case MatcherKind::sym_fginn_intersection: return "sym_fginn_intersection";
    case MatcherKind::sym_fginn_union: return "sym_fginn_union";
    case MatcherKind::gms: return "gms";
  }
  return "bruteforce";
}

inline std::string_view to_string(EstimatorKind e) {
  return e == EstimatorKind::ransac ? "ransac" : "magsac";
}

inline MatcherKind parse_matcher(std::string_view s) {
  for (auto m : {MatcherKind::bruteforce, MatcherKind::mutual_nn, MatcherKind::fginn,
                 MatcherKind::sym_fginn_intersection, MatcherKind::sym_fginn_union, MatcherKind::gms}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::config_error, "unknown matcher '" + std::string(s) + "'");
}

inline EstimatorKind parse_estimator(std::string_view s) {
  if (s == "ransac") return EstimatorKind::ransac;
  if (s == "magsac") return EstimatorKind::magsac;
  throw Error(ErrorCode::config_error, "unknown estimator '" + std::string(s) + "'");
}

struct TrackerParams {
  FastParams fast;
  /// Extra pixels removed around the human mask.
  int mask_margin = 5;
  MatcherKind matcher = MatcherKind::sym_fginn_intersection;
  EstimatorKind estimator = EstimatorKind::ransac;
  FginnParams fginn;
  GmsParams gms;
  RansacParams ransac;
  MagsacParams magsac;

  std::string method_tag() const {
    return std::string(to_string(matcher)) + "+" + std::string(to_string(estimator));
  }
};

inline Features extract_features(const ImageGray& frame, const BinaryMask* human_mask,
                                 const TrackerParams& params) {
  Features f = describe(frame, detect_keypoints(frame, params.fast));
  if (human_mask) f = filter_keypoints_by_mask(f, *human_mask, params.mask_margin);
  return f;
}

inline std::vector<Match> match_features(const Features& prev, const Features& curr,
                                         const TrackerParams& params) {
  switch (params.matcher) {
    case MatcherKind::bruteforce: return match_bruteforce(prev.descriptors, curr.descriptors);
    case MatcherKind::mutual_nn: return match_mutual_nn(prev.descriptors, curr.descriptors);
    case MatcherKind::fginn:
      return match_fginn(prev.keypoints, prev.descriptors, curr.keypoints, curr.descriptors,
                         params.fginn);
    case MatcherKind::sym_fginn_intersection:
      return match_sym_fginn(SymmetricMode::intersection, prev, curr, params.fginn);
    case MatcherKind::sym_fginn_union:
      return match_sym_fginn(SymmetricMode::union_, prev, curr, params.fginn);
    case MatcherKind::gms:
      return filter_gms(prev, curr, match_bruteforce(prev.descriptors, curr.descriptors), params.gms);
  }
  return {};
}

struct FrameMotion {
  /// Maps the previous frame onto the current one.
  Homography h;
  std::size_t n_matches = 0;
  std::size_t n_inliers = 0;
};

inline RobustFitResult estimate_homography(std::span<const Point2> src, std::span<const Point2> dst,
                                           const TrackerParams& params) {
  return params.estimator == EstimatorKind::ransac
             ? estimate_homography_ransac(src, dst, params.ransac)
             : estimate_homography_magsac(src, dst, params.magsac);
}

/// Frame-to-frame homography from two feature sets.
inline FrameMotion estimate_motion(const Features& prev, const Features& curr,
                                   const TrackerParams& params) {
  if (prev.size() < 4 || curr.size() < 4) {
    throw Error(ErrorCode::insufficient_matches, "too few keypoints to track");
  }
  const auto matches = match_features(prev, curr, params);
  std::vector<Point2> src, dst;
  src.reserve(matches.size());
  dst.reserve(matches.size());
  for (const auto& m : matches) {
    src.push_back(prev.keypoints[static_cast<std::size_t>(m.query_idx)].pt);
    dst.push_back(curr.keypoints[static_cast<std::size_t>(m.train_idx)].pt);
  }
  const auto fit = estimate_homography(src, dst, params);
  return {fit.h, matches.size(), fit.inlier_count()};
}

}  // namespace vpp
