#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vpp/tracker/matching.hpp"

using namespace vpp;

namespace {

BinaryDescriptor with_bits(int n) {
  BinaryDescriptor d{};
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63);
  return d;
}

BinaryDescriptor random_descriptor(std::mt19937_64& rng) { return {rng(), rng(), rng(), rng()}; }

BinaryDescriptor xor_bits(BinaryDescriptor d, int first, int n) {
  for (int b = first; b < first + n; ++b) d[static_cast<std::size_t>(b) >> 6] ^= std::uint64_t{1} << (b & 63);
  return d;
}

}  // namespace

TEST(Bruteforce, NearestWithLowIndexTies) {
  const std::vector<BinaryDescriptor> q{with_bits(0), with_bits(10)};
  const std::vector<BinaryDescriptor> t{with_bits(3), with_bits(12), with_bits(8), with_bits(12)};
  const auto m = match_bruteforce(q, t);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (Match{0, 0, 3}));
  // with_bits(8) and with_bits(12) are both 2 away: lower index wins.
  EXPECT_EQ(m[1], (Match{1, 1, 2}));
  EXPECT_THROW(match_bruteforce({}, t), Error);
}

TEST(Bruteforce, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(31);
  std::vector<BinaryDescriptor> q, t;
  for (int i = 0; i < 60; ++i) q.push_back(random_descriptor(rng));
  for (int i = 0; i < 80; ++i) t.push_back(random_descriptor(rng));
  const auto m = match_bruteforce(q, t);
  for (std::size_t i = 0; i < q.size(); ++i) {
    int best = 1000, idx = -1;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const int d = hamming(q[i], t[j]);
      if (d < best) {
        best = d;
        idx = static_cast<int>(j);
      }
    }
    EXPECT_EQ(m[i], (Match{static_cast<int>(i), idx, best}));
  }
}

TEST(MutualNn, KeepsOnlyReciprocalPairs) {
  const std::vector<BinaryDescriptor> q{with_bits(0), with_bits(1)};
  const std::vector<BinaryDescriptor> t{with_bits(0)};
  const auto m = match_mutual_nn(q, t);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], (Match{0, 0, 0}));
}

TEST(Fginn, RatioAgainstGeometricallyDistantCompetitor) {
  std::mt19937_64 rng(32);
  const BinaryDescriptor base = random_descriptor(rng);
  const std::vector<Keypoint> qk{{{0, 0}, 1, 0}};
  const std::vector<BinaryDescriptor> qd{base};
  // Second-best is a near-duplicate 2 px away from the best: ignored.
  const std::vector<Keypoint> tk{{{50, 50}, 1, 0}, {{52, 50}, 1, 0}, {{90, 90}, 1, 0}};
  const std::vector<BinaryDescriptor> td{base, xor_bits(base, 0, 1), with_bits(0)};
  const auto m = match_fginn(qk, qd, tk, td);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].train_idx, 0);
  // The same near-duplicate 30 px away is a real competitor.
  const std::vector<Keypoint> far{{{50, 50}, 1, 0}, {{80, 50}, 1, 0}, {{90, 90}, 1, 0}};
  const std::vector<BinaryDescriptor> td2{xor_bits(base, 0, 3), xor_bits(base, 3, 3), with_bits(0)};
  EXPECT_TRUE(match_fginn(qk, qd, far, td2).empty());
  // Lone candidate: accepted.
  EXPECT_EQ(match_fginn(qk, qd, std::vector<Keypoint>{{{1, 1}, 1, 0}}, std::vector<BinaryDescriptor>{base}).size(), 1u);
  EXPECT_THROW(match_fginn(qk, qd, tk, std::vector<BinaryDescriptor>{base}), Error);
}

TEST(Symmetric, IntersectionAndUnion) {
  const std::vector<Match> fwd{{0, 1, 5}, {1, 2, 3}, {2, 0, 9}};
  const std::vector<Match> bwd{{1, 0, 5}, {2, 1, 3}, {1, 2, 7}};  // B->A
  const auto inter = match_symmetric(SymmetricMode::intersection, fwd, bwd);
  ASSERT_EQ(inter.size(), 2u);
  EXPECT_EQ(inter[0], (Match{0, 1, 5}));
  EXPECT_EQ(inter[1], (Match{1, 2, 3}));
  const auto uni = match_symmetric(SymmetricMode::union_, fwd, bwd);
  ASSERT_EQ(uni.size(), 4u);
  EXPECT_EQ(uni[0], (Match{0, 1, 5}));
  EXPECT_EQ(uni[1], (Match{1, 2, 3}));
  EXPECT_EQ(uni[2], (Match{2, 0, 9}));
  EXPECT_EQ(uni[3], (Match{2, 1, 7}));
}

TEST(Symmetric, IntersectionIsSubsetOfUnionProperty) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 100; ++t) {
    std::vector<Match> f, b;
    for (int i = 0; i < 30; ++i) f.push_back({i, static_cast<int>(rng() % 30), 0});
    for (int i = 0; i < 30; ++i) b.push_back({i, static_cast<int>(rng() % 30), 0});
    const auto inter = match_symmetric(SymmetricMode::intersection, f, b);
    const auto uni = match_symmetric(SymmetricMode::union_, f, b);
    for (const auto& m : inter) ASSERT_NE(std::find(uni.begin(), uni.end(), m), uni.end());
    ASSERT_GE(uni.size(), inter.size());
    ASSERT_TRUE(std::is_sorted(uni.begin(), uni.end(), [](const Match& a, const Match& c) {
      return a.query_idx != c.query_idx ? a.query_idx < c.query_idx : a.train_idx < c.train_idx;
    }));
  }
}

TEST(Gms, KeepsConsistentMotionAndDropsScatter) {
  std::mt19937_64 rng(34);
  std::vector<Keypoint> q, t;
  std::vector<Match> matches;
  // 2000 inliers moving by (+4, +2) plus 500 random outliers: a few per grid cell.
  for (int i = 0; i < 2500; ++i) {
    const Point2 p{testkit::uniform(rng, 10, 390), testkit::uniform(rng, 10, 290)};
    q.push_back({p, 1, 0});
    const Point2 d = i < 2000 ? p + Point2{4, 2}
                             : Point2{testkit::uniform(rng, 0, 400), testkit::uniform(rng, 0, 300)};
    t.push_back({d, 1, 0});
    matches.push_back({i, i, 0});
  }
  const auto kept = filter_gms(q, 400, 300, t, 400, 300, matches);
  int inliers = 0, outliers = 0;
  for (const auto& m : kept) (m.query_idx < 2000 ? inliers : outliers)++;
  EXPECT_GE(inliers, 1800);
  EXPECT_LE(outliers, 25);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end(),
                             [](const Match& a, const Match& b) { return a.query_idx < b.query_idx; }));
}

TEST(Gms, PassesThroughSmallSets) {
  const std::vector<Keypoint> k{{{1, 1}, 1, 0}};
  const std::vector<Match> m(5, Match{0, 0, 0});
  EXPECT_EQ(filter_gms(k, 10, 10, k, 10, 10, m).size(), 5u);
}
