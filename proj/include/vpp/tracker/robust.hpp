#pragma once

// Robust homography estimation: classic RANSAC and a sigma-marginalized
// variant in the spirit of MAGSAC (quality averaged over a fixed partition
// of noise scales instead of one inlier threshold).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"

namespace vpp {

struct RobustFitResult {
  Homography h;
  std::vector<bool> inlier_mask;
  /// RANSAC: inlier count. MAGSAC: marginalized quality.
  double score = 0;
  int iterations = 0;

  std::size_t inlier_count() const {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
  }
};

struct RansacParams {
  double threshold = 3.0;
  double confidence = 0.995;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  /// A model must explain at least max(4, ceil(min_inlier_ratio * n)) points.
  double min_inlier_ratio = 0.1;
};

struct MagsacParams {
  double max_sigma = 10.0;
  int partitions = 10;
  double confidence = 0.995;
  int max_iters = 2000;
  std::uint64_t seed = 0;
  double min_inlier_ratio = 0.1;
  int refit_passes = 3;
};

namespace detail {

inline void require_correspondences(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::length_mismatch, "source and destination point counts differ");
  }
  if (src.size() < 4) {
    throw Error(ErrorCode::insufficient_matches, "a homography needs at least 4 matches");
  }
}

inline std::size_t acceptance_floor(std::size_t n, double ratio) {
  return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n))));
}

/// Four distinct indices in [0, n). Uses raw engine output so the sequence is
/// the same on every standard library.
inline std::array<std::size_t, 4> draw_sample(std::mt19937_64& rng, std::size_t n) {
  std::array<std::size_t, 4> s{};
  for (std::size_t k = 0; k < 4; ++k) {
    bool fresh = false;
    while (!fresh) {
      s[k] = static_cast<std::size_t>(rng() % n);
      fresh = std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s[k]) ==
              s.begin() + static_cast<std::ptrdiff_t>(k);
    }
  }
  return s;
}

/// Rejects samples with collinear triples or with triangles whose
/// orientation flips between the two views.
inline bool sample_is_degenerate(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b) {
  if (has_collinear_triple(a) || has_collinear_triple(b)) return true;
  static constexpr int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  int sign = 0;
  for (const auto& t : triples) {
    const double sa = cross(a[t[1]] - a[t[0]], a[t[2]] - a[t[0]]);
    const double sb = cross(b[t[1]] - b[t[0]], b[t[2]] - b[t[0]]);
    const int s = (sa * sb > 0) ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return true;
  }
  return false;
}

inline double project_sq(const Eigen::Matrix3d& m, Point2 p, Point2 q) {
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < 1e-12) return std::numeric_limits<double>::infinity();
  const double dx = (m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w - q.x;
  const double dy = (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w - q.y;
  return dx * dx + dy * dy;
}

}  // namespace detail

/// sqrt((|H s - d|^2 + |H^-1 d - s|^2) / 2); infinite for points sent to
/// infinity or a singular H.
inline std::vector<double> symmetric_transfer_errors(const Homography& h, std::span<const Point2> src,
                                                     std::span<const Point2> dst) {
  std::vector<double> r(src.size(), std::numeric_limits<double>::infinity());
  if (!h.invertible()) return r;
  const Eigen::Matrix3d& f = h.matrix();
  const Eigen::Matrix3d b = f.inverse();
  for (std::size_t i = 0; i < src.size(); ++i) {
    r[i] = std::sqrt(0.5 * (detail::project_sq(f, src[i], dst[i]) + detail::project_sq(b, dst[i], src[i])));
  }
  return r;
}

namespace detail {

/// Standard adaptive bound: samples needed to draw one all-inlier minimal
/// set with the given confidence.
inline int adaptive_iterations(std::size_t inliers, std::size_t n, double confidence, int cap) {
  const double e = static_cast<double>(inliers) / static_cast<double>(n);
  const double p4 = e * e * e * e;
  if (p4 >= 1.0) return 1;
  if (p4 <= 0.0) return cap;
  const double k = std::log(1.0 - confidence) / std::log(1.0 - p4);
  if (!std::isfinite(k) || k >= cap) return cap;
  return std::max(1, static_cast<int>(std::ceil(k)));
}

/// Runs the sampling loop, handing each non-degenerate minimal model to
/// `consider`, which returns the support count used for termination.
template <class Consider>
int sample_models(std::span<const Point2> src, std::span<const Point2> dst, std::uint64_t seed,
                  int max_iters, double confidence, Consider&& consider, bool& any_model) {
  std::mt19937_64 rng(seed);
  const std::size_t n = src.size();
  int needed = max_iters;
  int done = 0;
  any_model = false;
  std::array<Point2, 4> a, b;
  while (done < needed) {
    ++done;
    const auto s = draw_sample(rng, n);
    for (int k = 0; k < 4; ++k) {
      a[k] = src[s[k]];
      b[k] = dst[s[k]];
    }
    if (sample_is_degenerate(a, b)) {
      if (n == 4) break;
      continue;
    }
    const auto h = fit_homography_dlt(a, b);
    if (!h) continue;
    any_model = true;
    const std::size_t support = consider(*h);
    needed = std::min(needed, adaptive_iterations(support, n, confidence, max_iters));
  }
  return done;
}

}  // namespace detail

inline RobustFitResult estimate_homography_ransac(std::span<const Point2> src,
                                                  std::span<const Point2> dst,
                                                  const RansacParams& params = {}) {
  detail::require_correspondences(src, dst);
  const std::size_t n = src.size();
  std::optional<Homography> best;
  std::size_t best_count = 0;
  double best_err = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Homography& h, std::size_t& count, double& err) {
    const auto r = symmetric_transfer_errors(h, src, dst);
    count = 0;
    err = 0;
    for (double v : r) {
      if (v < params.threshold) {
        ++count;
        err += v;
      }
    }
    return r;
  };

  bool any_model = false;
  const int iters = detail::sample_models(
      src, dst, params.seed, params.max_iters, params.confidence,
      [&](const Homography& h) {
        std::size_t count;
        double err;
        evaluate(h, count, err);
        if (count > best_count || (count == best_count && err < best_err)) {
          best = h;
          best_count = count;
          best_err = err;
        }
        return best_count;
      },
      any_model);
  if (!any_model || !best) throw Error(ErrorCode::no_model, "every minimal sample was degenerate");

  // Least-squares refit on the consensus set, repeated while it grows.
  std::vector<double> r = symmetric_transfer_errors(*best, src, dst);
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<Point2> s, d;
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i] < params.threshold) {
        s.push_back(src[i]);
        d.push_back(dst[i]);
      }
    }
    const auto refit = fit_homography_dlt(s, d);
    if (!refit) break;
    std::size_t count;
    double err;
    auto rr = evaluate(*refit, count, err);
    if (count < best_count) break;
    const bool same_set = count == best_count;
    best = refit;
    best_count = count;
    r = std::move(rr);
    if (same_set) break;
  }

  RobustFitResult out;
  out.h = *best;
  out.inlier_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.inlier_mask[i] = r[i] < params.threshold;
  out.score = static_cast<double>(best_count);
  out.iterations = iters;
  if (best_count < detail::acceptance_floor(n, params.min_inlier_ratio)) {
    throw Error(ErrorCode::no_model, "no model reaches the minimum inlier support");
  }
  return out;
}

namespace detail {

/// Marginalized per-point weights and their sum (the model quality).
/// weight(r) = mean over k of max(0, 1 - r^2 / sigma_k^2), sigma_k = k * max_sigma / K.
inline double marginal_weights(std::span<const double> residuals, double max_sigma, int partitions,
                               std::vector<double>& w) {
  w.assign(residuals.size(), 0.0);
  double quality = 0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double r2 = residuals[i] * residuals[i];
    if (!(residuals[i] < max_sigma)) continue;
    double acc = 0;
    for (int k = partitions; k >= 1; --k) {
      const double s = max_sigma * k / partitions;
      if (residuals[i] >= s) break;
      acc += 1.0 - r2 / (s * s);
    }
    w[i] = acc / partitions;
    quality += w[i];
  }
  return quality;
}

}  // namespace detail

/// Inliers are points whose marginalized weight reaches 0.5 (about 3.25 px
/// at the default scale range).
inline RobustFitResult estimate_homography_magsac(std::span<const Point2> src,
                                                  std::span<const Point2> dst,
                                                  const MagsacParams& params = {}) {
  detail::require_correspondences(src, dst);
  if (params.partitions < 1 || !(params.max_sigma > 0)) {
    throw Error(ErrorCode::config_error, "MAGSAC needs positive partitions and max_sigma");
  }
  const std::size_t n = src.size();
  std::optional<Homography> best;
  double best_q = -1;
  std::vector<double> w;

  bool any_model = false;
  std::size_t best_support = 0;
  const int iters = detail::sample_models(
      src, dst, params.seed, params.max_iters, params.confidence,
      [&](const Homography& h) {
        const auto r = symmetric_transfer_errors(h, src, dst);
        const double q = detail::marginal_weights(r, params.max_sigma, params.partitions, w);
        if (q > best_q) {
          best_q = q;
          best = h;
          best_support = static_cast<std::size_t>(
              std::count_if(w.begin(), w.end(), [](double v) { return v >= 0.5; }));
        }
        return best_support;
      },
      any_model);
  if (!any_model || !best) throw Error(ErrorCode::no_model, "every minimal sample was degenerate");

  // Iteratively reweighted refit, keeping whichever model scores best.
  auto r = symmetric_transfer_errors(*best, src, dst);
  detail::marginal_weights(r, params.max_sigma, params.partitions, w);
  for (int pass = 0; pass < params.refit_passes; ++pass) {
    std::vector<Point2> s, d;
    std::vector<double> sw;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] > 0) {
        s.push_back(src[i]);
        d.push_back(dst[i]);
        sw.push_back(w[i]);
      }
    }
    const auto refit = fit_homography_dlt(s, d, sw);
    if (!refit) break;
    auto rr = symmetric_transfer_errors(*refit, src, dst);
    std::vector<double> ww;
    const double q = detail::marginal_weights(rr, params.max_sigma, params.partitions, ww);
    if (q < best_q) break;
    best_q = q;
    best = refit;
    r = std::move(rr);
    w = std::move(ww);
  }

  RobustFitResult out;
  out.h = *best;
  out.inlier_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.inlier_mask[i] = w[i] >= 0.5;
  out.score = best_q;
  out.iterations = iters;
  if (out.inlier_count() < detail::acceptance_floor(n, params.min_inlier_ratio)) {
    throw Error(ErrorCode::no_model, "no model reaches the minimum inlier support");
  }
  return out;
}

}  // namespace vpp
