#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/tracker/features.hpp"

namespace vpp {

struct Match {
  int query_idx = 0;
  int train_idx = 0;
  int distance = 0;

  friend bool operator==(const Match&, const Match&) = default;
};

namespace detail {

inline void require_descriptors(std::span<const BinaryDescriptor> qd,
                                std::span<const BinaryDescriptor> td) {
  if (qd.empty() || td.empty()) throw Error(ErrorCode::empty_input, "no descriptors to match");
}

struct Nearest {
  int idx = -1;
  int dist = std::numeric_limits<int>::max();
};

inline Nearest nearest(const BinaryDescriptor& q, std::span<const BinaryDescriptor> td) {
  Nearest best;
  for (std::size_t j = 0; j < td.size(); ++j) {
    const int d = hamming(q, td[j]);
    if (d < best.dist) best = {static_cast<int>(j), d};
  }
  return best;
}

}  // namespace detail

/// Nearest train descriptor for every query; ties go to the lower index.
inline std::vector<Match> match_bruteforce(std::span<const BinaryDescriptor> qd,
                                           std::span<const BinaryDescriptor> td) {
  detail::require_descriptors(qd, td);
  std::vector<Match> out;
  out.reserve(qd.size());
  for (std::size_t i = 0; i < qd.size(); ++i) {
    const auto n = detail::nearest(qd[i], td);
    out.push_back({static_cast<int>(i), n.idx, n.dist});
  }
  return out;
}

inline std::vector<Match> match_mutual_nn(std::span<const BinaryDescriptor> qd,
                                          std::span<const BinaryDescriptor> td) {
  const auto fwd = match_bruteforce(qd, td);
  std::vector<Match> out;
  for (const auto& m : fwd) {
    if (detail::nearest(td[static_cast<std::size_t>(m.train_idx)], qd).idx == m.query_idx) {
      out.push_back(m);
    }
  }
  return out;
}

struct FginnParams {
  double ratio = 0.8;
  double min_geom_dist = 10.0;
};

/// Ratio test against the best train candidate lying at least min_geom_dist
/// away from the nearest neighbour's keypoint. A query with no such
/// candidate is accepted.
inline std::vector<Match> match_fginn(std::span<const Keypoint> qkps,
                                      std::span<const BinaryDescriptor> qd,
                                      std::span<const Keypoint> tkps,
                                      std::span<const BinaryDescriptor> td,
                                      const FginnParams& params = {}) {
  detail::require_descriptors(qd, td);
  if (qkps.size() != qd.size() || tkps.size() != td.size()) {
    throw Error(ErrorCode::length_mismatch, "keypoints and descriptors are not paired");
  }
  const double min_d2 = params.min_geom_dist * params.min_geom_dist;
  std::vector<int> dist(td.size());
  std::vector<Match> out;
  for (std::size_t i = 0; i < qd.size(); ++i) {
    detail::Nearest first;
    for (std::size_t j = 0; j < td.size(); ++j) {
      dist[j] = hamming(qd[i], td[j]);
      if (dist[j] < first.dist) first = {static_cast<int>(j), dist[j]};
    }
    const Point2 anchor = tkps[static_cast<std::size_t>(first.idx)].pt;
    int second = std::numeric_limits<int>::max();
    for (std::size_t j = 0; j < td.size(); ++j) {
      const Point2 d = tkps[j].pt - anchor;
      if (d.x * d.x + d.y * d.y >= min_d2) second = std::min(second, dist[j]);
    }
    const bool accept = second == std::numeric_limits<int>::max() ||
                        static_cast<double>(first.dist) < params.ratio * second;
    if (accept) out.push_back({static_cast<int>(i), first.idx, first.dist});
  }
  return out;
}

enum class SymmetricMode { intersection, union_ };

/// Combines A->B and B->A matches in (A index, B index) orientation, sorted
/// by query then train index.
inline std::vector<Match> match_symmetric(SymmetricMode mode, std::span<const Match> forward,
                                          std::span<const Match> backward) {
  auto key = [](int q, int t) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(q)) << 32) |
           static_cast<std::uint32_t>(t);
  };
  std::unordered_map<std::uint64_t, int> fwd;
  for (const auto& m : forward) fwd.emplace(key(m.query_idx, m.train_idx), m.distance);
  std::unordered_map<std::uint64_t, int> bwd;
  for (const auto& m : backward) bwd.emplace(key(m.train_idx, m.query_idx), m.distance);

  std::vector<Match> out;
  auto emit = [&out](std::uint64_t k, int d) {
    out.push_back({static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu), d});
  };
  for (const auto& [k, d] : fwd) {
    if (mode == SymmetricMode::union_ || bwd.count(k)) emit(k, d);
  }
  if (mode == SymmetricMode::union_) {
    for (const auto& [k, d] : bwd) {
      if (!fwd.count(k)) emit(k, d);
    }
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    return a.query_idx != b.query_idx ? a.query_idx < b.query_idx : a.train_idx < b.train_idx;
  });
  return out;
}

/// FGINN in both directions, combined by `mode`.
inline std::vector<Match> match_sym_fginn(SymmetricMode mode, const Features& a, const Features& b,
                                          const FginnParams& params = {}) {
  const auto fwd = match_fginn(a.keypoints, a.descriptors, b.keypoints, b.descriptors, params);
  const auto bwd = match_fginn(b.keypoints, b.descriptors, a.keypoints, a.descriptors, params);
  return match_symmetric(mode, fwd, bwd);
}

struct GmsParams {
  int grid = 20;
  double alpha = 6.0;
  /// Below this many matches the filter passes everything through.
  std::size_t min_matches = 10;
};

/// Grid-based motion statistics. Both frames are split into grid x grid
/// cells; each query cell votes for its dominant train cell, and a match
/// survives if it belongs to that cell pair and the 3x3 neighbourhood support
/// exceeds alpha * sqrt(mean matches per neighbouring query cell). The query
/// grid is evaluated at four half-cell shifts; surviving any shift keeps the
/// match. Output preserves input order.
inline std::vector<Match> filter_gms(std::span<const Keypoint> qkps, int q_width, int q_height,
                                     std::span<const Keypoint> tkps, int t_width, int t_height,
                                     std::span<const Match> matches, const GmsParams& params = {}) {
  if (matches.size() < params.min_matches) return {matches.begin(), matches.end()};
  if (params.grid < 1 || q_width <= 0 || q_height <= 0 || t_width <= 0 || t_height <= 0) {
    throw Error(ErrorCode::config_error, "GMS needs a positive grid and frame size");
  }
  const int g = params.grid;
  // Shifted grids need one extra row and column.
  const int side = g + 1;
  const int ncells = side * side;

  auto cell_of = [g](const Point2& p, int w, int h, double sx, double sy) {
    const int cx = std::clamp(static_cast<int>(std::floor(p.x * g / w + sx)), 0, g);
    const int cy = std::clamp(static_cast<int>(std::floor(p.y * g / h + sy)), 0, g);
    return std::pair{cx, cy};
  };

  std::vector<int> tcell(matches.size());
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto [cx, cy] =
        cell_of(tkps[static_cast<std::size_t>(matches[k].train_idx)].pt, t_width, t_height, 0, 0);
    tcell[k] = cy * side + cx;
  }

  std::vector<char> keep(matches.size(), 0);
  std::vector<int> qcell(matches.size());
  std::vector<int> per_cell(static_cast<std::size_t>(ncells));
  std::vector<int> best_t(static_cast<std::size_t>(ncells));
  std::unordered_map<std::uint64_t, int> pair_count;
  auto pair_key = [ncells](int qc, int tc) {
    return static_cast<std::uint64_t>(qc) * static_cast<std::uint64_t>(ncells) +
           static_cast<std::uint64_t>(tc);
  };

  constexpr std::array<std::array<double, 2>, 4> kShifts{{{0, 0}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}}};
  for (const auto& [sx, sy] : kShifts) {
    std::fill(per_cell.begin(), per_cell.end(), 0);
    std::fill(best_t.begin(), best_t.end(), -1);
    pair_count.clear();
    for (std::size_t k = 0; k < matches.size(); ++k) {
      const auto [cx, cy] =
          cell_of(qkps[static_cast<std::size_t>(matches[k].query_idx)].pt, q_width, q_height, sx, sy);
      qcell[k] = cy * side + cx;
      ++per_cell[static_cast<std::size_t>(qcell[k])];
      ++pair_count[pair_key(qcell[k], tcell[k])];
    }
    // Dominant train cell per query cell; ties go to the lower cell index.
    std::vector<int> best_n(static_cast<std::size_t>(ncells), 0);
    for (const auto& [k, n] : pair_count) {
      const int qc = static_cast<int>(k / static_cast<std::uint64_t>(ncells));
      const int tc = static_cast<int>(k % static_cast<std::uint64_t>(ncells));
      auto& bn = best_n[static_cast<std::size_t>(qc)];
      auto& bt = best_t[static_cast<std::size_t>(qc)];
      if (n > bn || (n == bn && tc < bt)) {
        bn = n;
        bt = tc;
      }
    }
    std::vector<signed char> verdict(static_cast<std::size_t>(ncells), -1);
    auto passes = [&](int qc) {
      auto& v = verdict[static_cast<std::size_t>(qc)];
      if (v >= 0) return v == 1;
      const int qx = qc % side, qy = qc / side;
      const int tc = best_t[static_cast<std::size_t>(qc)];
      const int tx = tc % side, ty = tc / side;
      double support = 0, features = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int ax = qx + dx, ay = qy + dy, bx = tx + dx, by = ty + dy;
          if (ax < 0 || ay < 0 || ax > g || ay > g) continue;
          const int a = ay * side + ax;
          features += per_cell[static_cast<std::size_t>(a)];
          if (bx < 0 || by < 0 || bx > g || by > g) continue;
          const auto it = pair_count.find(pair_key(a, by * side + bx));
          if (it != pair_count.end()) support += it->second;
        }
      }
      const bool ok = support > params.alpha * std::sqrt(features / 9.0);
      v = ok ? 1 : 0;
      return ok;
    };
    for (std::size_t k = 0; k < matches.size(); ++k) {
      if (keep[k] || best_t[static_cast<std::size_t>(qcell[k])] != tcell[k]) continue;
      if (passes(qcell[k])) keep[k] = 1;
    }
  }

  std::vector<Match> out;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (keep[k]) out.push_back(matches[k]);
  }
  return out;
}

inline std::vector<Match> filter_gms(const Features& q, const Features& t,
                                     std::span<const Match> matches, const GmsParams& params = {}) {
  return filter_gms(q.keypoints, q.width, q.height, t.keypoints, t.width, t.height, matches, params);
}

}  // namespace vpp
