#pragma once

// Reprojection-error benchmark across matcher/estimator combinations.
// Ground-truth quads stand in for a placement model's per-frame predictions,
// so they may carry detector-like noise (gt_noise_sigma per coordinate).

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpp/image_io.hpp"
#include "vpp/interchange.hpp"
#include "vpp/pipeline/config.hpp"
#include "vpp/pipeline/metrics.hpp"
#include "vpp/pipeline/pipeline.hpp"
#include "vpp/synthetic.hpp"
#include "vpp/tracker/tracking.hpp"

namespace vpp {

struct BenchConfig {
  /// Real sequence: frames, ground truth and optional human masks. When
  /// frames_dir is unset, synthetic sequences are generated instead.
  std::optional<fs::path> frames_dir;
  std::optional<fs::path> gt_path;
  std::optional<fs::path> masks_dir;
  synthetic::SceneParams scene;
  int sequences = 1;
  double gt_noise_sigma = 0.5;
  /// Independent ground-truth noise draws averaged per frame pair.
  int gt_noise_trials = 1;
  /// Gaussian jitter added to keypoint positions after extraction.
  double keypoint_noise_sigma = 0.0;
  std::vector<MatcherKind> matchers{MatcherKind::sym_fginn_intersection, MatcherKind::sym_fginn_union};
  std::vector<EstimatorKind> estimators{EstimatorKind::ransac, EstimatorKind::magsac};
  TrackerParams tracker;
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::string matcher;
  std::string estimator;
  std::size_t pairs = 0;
  std::size_t failures = 0;
  std::optional<double> mean_reproj_error;
  double mean_matches = 0;
  double mean_inliers = 0;
  double ms_per_pair = 0;

  json to_json() const {
    return {{"detector", "orb"},
            {"matcher", matcher},
            {"estimator", estimator},
            {"pairs", pairs},
            {"failures", failures},
            {"mean_reproj_error", mean_reproj_error ? json(*mean_reproj_error) : json(nullptr)},
            {"mean_matches", mean_matches},
            {"mean_inliers", mean_inliers},
            {"ms_per_pair", ms_per_pair}};
  }
};

inline BenchConfig parse_bench_config(const json& j, const fs::path& base) {
  BenchConfig c;
  detail::ObjectReader r(j, "bench");
  std::optional<std::string> frames, gt, masks;
  r.get("frames_dir", frames);
  r.get("gt", gt);
  r.get("masks_dir", masks);
  if (frames) c.frames_dir = detail::resolve(base, *frames);
  if (gt) c.gt_path = detail::resolve(base, *gt);
  if (masks) c.masks_dir = detail::resolve(base, *masks);
  if (c.frames_dir.has_value() != c.gt_path.has_value()) {
    throw Error(ErrorCode::config_error, "frames_dir and gt must be given together");
  }
  if (r.has("synthetic")) {
    detail::ObjectReader s(r.at("synthetic"), "synthetic");
    s.get("frame_w", c.scene.frame_w);
    s.get("frame_h", c.scene.frame_h);
    s.get("frames", c.scene.frames);
    s.get("dx", c.scene.dx);
    s.get("dy", c.scene.dy);
    s.get("seed", c.scene.seed);
    s.get("clutter", c.scene.clutter);
    s.get("with_person", c.scene.with_person);
    s.get("sequences", c.sequences);
    s.finish();
  }
  r.get("gt_noise_sigma", c.gt_noise_sigma);
  r.get("gt_noise_trials", c.gt_noise_trials);
  r.get("keypoint_noise_sigma", c.keypoint_noise_sigma);
  r.get("seed", c.seed);
  if (r.has("matchers")) {
    c.matchers.clear();
    std::vector<std::string> names;
    r.get("matchers", names);
    for (const auto& n : names) c.matchers.push_back(parse_matcher(n));
  }
  if (r.has("estimators")) {
    c.estimators.clear();
    std::vector<std::string> names;
    r.get("estimators", names);
    for (const auto& n : names) c.estimators.push_back(parse_estimator(n));
  }
  if (r.has("tracker")) parse_tracker(r.at("tracker"), c.tracker);
  r.finish();

  if (c.sequences < 1 || c.scene.frames < 2 || c.scene.frame_w < 64 || c.scene.frame_h < 64) {
    throw Error(ErrorCode::config_error, "benchmark needs >= 1 sequence of >= 2 frames of >= 64x64");
  }
  if (!(c.gt_noise_sigma >= 0) || !(c.keypoint_noise_sigma >= 0) || c.gt_noise_trials < 1) {
    throw Error(ErrorCode::config_error, "noise sigmas must be >= 0 and gt_noise_trials >= 1");
  }
  if (c.matchers.empty() || c.estimators.empty()) {
    throw Error(ErrorCode::config_error, "no matcher/estimator combination selected");
  }
  if (c.frames_dir && !fs::is_directory(*c.frames_dir)) {
    throw Error(ErrorCode::config_error, "frames_dir not found: " + c.frames_dir->string());
  }
  if (c.gt_path && !fs::is_regular_file(*c.gt_path)) {
    throw Error(ErrorCode::config_error, "gt not found: " + c.gt_path->string());
  }
  validate_tracker(c.tracker);
  c.tracker.ransac.seed = c.tracker.magsac.seed = c.seed;
  return c;
}

namespace detail {

struct BenchSequence {
  std::vector<Features> features;
  /// gt[t][k]: noise draw k of frame t's ground truth.
  std::vector<std::vector<Quad>> gt;
};

inline Quad jitter(const Quad& q, double sigma, std::mt19937_64& rng) {
  Quad out = q;
  for (auto& p : out.corners) {
    p.x += sigma * synthetic::gaussian(rng);
    p.y += sigma * synthetic::gaussian(rng);
  }
  return out;
}

inline std::vector<Quad> noisy_truth(const Quad& q, const BenchConfig& c, std::mt19937_64& rng) {
  std::vector<Quad> out;
  for (int k = 0; k < c.gt_noise_trials; ++k) out.push_back(jitter(q, c.gt_noise_sigma, rng));
  return out;
}

inline Features jitter_keypoints(Features f, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0) return f;
  for (auto& k : f.keypoints) {
    k.pt.x += sigma * synthetic::gaussian(rng);
    k.pt.y += sigma * synthetic::gaussian(rng);
  }
  return f;
}

inline std::vector<BenchSequence> load_bench_sequences(const BenchConfig& c) {
  std::vector<BenchSequence> seqs;
  std::mt19937_64 rng(c.seed ^ 0x6a09e667f3bcc908ULL);
  std::mt19937_64 kp_rng(c.seed ^ 0xbb67ae8584caa73bULL);
  if (c.frames_dir) {
    BenchSequence s;
    const auto gt = ground_truth_from_json(read_json_file(*c.gt_path));
    const auto frames = list_frames(*c.frames_dir);
    if (frames.size() < 2) throw Error(ErrorCode::empty_sequence, "benchmark needs at least 2 frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const ImageRGB img = load_image(frames[i]);
      std::optional<BinaryMask> human;
      if (c.masks_dir) {
        const fs::path p = *c.masks_dir / (frames[i].stem().string() + ".human.png");
        if (fs::exists(p)) human = load_mask(p);
      }
      s.features.push_back(jitter_keypoints(
          extract_features(to_gray(img), human ? &*human : nullptr, c.tracker), c.keypoint_noise_sigma, kp_rng));
      const auto it = gt.find(static_cast<int>(i));
      s.gt.push_back(it == gt.end() ? std::vector<Quad>{} : noisy_truth(it->second, c, rng));
    }
    seqs.push_back(std::move(s));
    return seqs;
  }
  for (int k = 0; k < c.sequences; ++k) {
    synthetic::SceneParams p = c.scene;
    p.seed = c.scene.seed + static_cast<std::uint64_t>(k);
    const synthetic::Backdrop bd(p);
    BenchSequence s;
    for (int t = 0; t < p.frames; ++t) {
      const synthetic::Frame f = bd.frame(t);
      s.features.push_back(
          jitter_keypoints(extract_features(to_gray(f.image), &f.human, c.tracker), c.keypoint_noise_sigma, kp_rng));
      s.gt.push_back(noisy_truth(f.panel, c, rng));
    }
    seqs.push_back(std::move(s));
  }
  return seqs;
}

}  // namespace detail

/// One row per matcher/estimator pair. Features are extracted once and
/// shared by every combination.
inline std::vector<BenchRow> run_tracking_bench(const BenchConfig& c) {
  const auto seqs = detail::load_bench_sequences(c);
  std::vector<BenchRow> rows;
  for (const auto mk : c.matchers) {
    for (const auto ek : c.estimators) {
      TrackerParams tp = c.tracker;
      tp.matcher = mk;
      tp.estimator = ek;
      BenchRow row;
      row.matcher = std::string(to_string(mk));
      row.estimator = std::string(to_string(ek));
      double err = 0, ms = 0, matches = 0, inliers = 0;
      std::size_t scored = 0;
      for (const auto& s : seqs) {
        for (std::size_t t = 1; t < s.features.size(); ++t) {
          ++row.pairs;
          const auto t0 = std::chrono::steady_clock::now();
          try {
            const FrameMotion m = estimate_motion(s.features[t - 1], s.features[t], tp);
            ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            matches += static_cast<double>(m.n_matches);
            inliers += static_cast<double>(m.n_inliers);
            const auto& a = s.gt[t - 1];
            const auto& b = s.gt[t];
            if (!a.empty() && !b.empty()) {
              double e = 0;
              for (std::size_t k = 0; k < a.size(); ++k) e += reprojection_error(m.h, a[k], b[k]);
              err += e / static_cast<double>(a.size());
              ++scored;
            }
          } catch (const Error&) {
            ++row.failures;
          }
        }
      }
      const std::size_t ok = row.pairs - row.failures;
      if (scored) row.mean_reproj_error = err / static_cast<double>(scored);
      if (ok) {
        row.mean_matches = matches / static_cast<double>(ok);
        row.mean_inliers = inliers / static_cast<double>(ok);
        row.ms_per_pair = ms / static_cast<double>(ok);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace vpp
