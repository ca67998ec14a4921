#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "chronoscale/time_scale.hpp"

using chronoscale::ErrorCode;
using chronoscale::Segment;
using chronoscale::TimeScale;

namespace {

std::vector<Segment> segs(std::initializer_list<std::pair<double, double>> l) {
  std::vector<Segment> out;
  for (auto [lo, hi] : l) out.push_back({lo, hi});
  return out;
}

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no error raised";
  } catch (const chronoscale::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Random raw segment lists with overlaps, duplicates and isolated points.
std::vector<Segment> random_raw(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> len(0.0, 2.0);
  std::bernoulli_distribution point(0.4);
  std::vector<Segment> raw;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    // Quarter-unit positions make exact adjacency common.
    const double lo = std::round(pos(rng) * 4.0) / 4.0;
    const double hi = point(rng) ? lo : lo + std::round(len(rng) * 4.0) / 4.0;
    raw.push_back({lo, hi});
  }
  return raw;
}

}  // namespace

TEST(Canonicalize, MergesAdjacentSegments) {
  EXPECT_EQ(TimeScale::canonicalize(segs({{0, 1}, {1, 2}})).segments(), segs({{0, 2}}));
}

TEST(Canonicalize, MergesOverlapAndSorts) {
  EXPECT_EQ(TimeScale::canonicalize(segs({{3, 3}, {0, 1}, {0.5, 2}})).segments(),
            segs({{0, 2}, {3, 3}}));
}

TEST(Canonicalize, SinglePointIsIdentity) {
  EXPECT_EQ(TimeScale::canonicalize(segs({{5, 5}})).segments(), segs({{5, 5}}));
}

TEST(Canonicalize, Errors) {
  expect_code(ErrorCode::kEmptyScale, [] { TimeScale::canonicalize({}); });
  expect_code(ErrorCode::kBadInterval, [] { TimeScale::canonicalize(segs({{2, 1}})); });
  expect_code(ErrorCode::kBadInterval,
              [] { TimeScale::canonicalize(segs({{0, std::numeric_limits<double>::infinity()}})); });
}

TEST(Canonicalize, SnapToleranceMergesNearDuplicates) {
  const auto raw = segs({{0, 1}, {1 + 1e-13, 2}, {3, 3}});
  EXPECT_EQ(TimeScale::canonicalize(raw).segments().size(), 3u);
  EXPECT_EQ(TimeScale::canonicalize(raw, 1e-12).segments(), segs({{0, 2}, {3, 3}}));
}

TEST(Canonicalize, PropertyIdempotentAndOrderIndependent) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    auto raw = random_raw(rng);
    const TimeScale T = TimeScale::canonicalize(raw);
    EXPECT_EQ(TimeScale::canonicalize(T.segments()), T);
    std::shuffle(raw.begin(), raw.end(), rng);
    EXPECT_EQ(TimeScale::canonicalize(raw), T);
    const auto& s = T.segments();
    for (std::size_t i = 0; i + 1 < s.size(); ++i) EXPECT_LT(s[i].hi, s[i + 1].lo);
    for (const auto& r : raw) {
      EXPECT_TRUE(T.contains(r.lo));
      EXPECT_TRUE(T.contains(r.hi));
    }
  }
}

TEST(Contains, Examples) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 2}}));
  EXPECT_TRUE(T.contains(0.5));
  EXPECT_FALSE(T.contains(1.5));
  EXPECT_TRUE(T.contains(2));
  EXPECT_FALSE(T.contains(-0.1));
  EXPECT_FALSE(T.contains(2.1));
}

TEST(Jumps, SigmaExamples) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  EXPECT_EQ(T.sigma(1), 2);
  EXPECT_EQ(T.sigma(0.5), 0.5);
  EXPECT_EQ(T.sigma(3), 3);
  const TimeScale R = TimeScale::interval(-4, 4);
  for (double t : {-3.5, 0.0, 1.25, 3.9}) {
    EXPECT_EQ(R.sigma(t), t);
    EXPECT_EQ(R.rho(t), t);
  }
}

TEST(Jumps, RhoExamples) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  EXPECT_EQ(T.rho(2), 1);
  EXPECT_EQ(T.rho(2.5), 2.5);
  EXPECT_EQ(T.rho(0), 0);
  const TimeScale L = TimeScale::lattice(0, 10, 0.5);
  EXPECT_DOUBLE_EQ(L.rho(3.0), 2.5);
}

TEST(Jumps, MuExamples) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  EXPECT_EQ(T.mu(1), 1);
  EXPECT_EQ(T.mu(0.3), 0);
  const TimeScale L = TimeScale::lattice(0, 3, 0.25);
  for (double t : {0.0, 0.5, 1.75}) EXPECT_DOUBLE_EQ(L.mu(t), 0.25);
}

TEST(Jumps, NotInScale) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  expect_code(ErrorCode::kNotInScale, [&] { T.sigma(1.5); });
  expect_code(ErrorCode::kNotInScale, [&] { T.rho(4); });
  expect_code(ErrorCode::kNotInScale, [&] { T.mu(-1); });
  expect_code(ErrorCode::kNotInScale, [&] { T.classify(1.5); });
}

TEST(Classify, Examples) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 2}}));
  const auto iso = T.classify(2);
  EXPECT_TRUE(iso.left_scattered());
  EXPECT_TRUE(iso.right_scattered());
  EXPECT_TRUE(iso.is_max);
  const auto mid = T.classify(0.5);
  EXPECT_FALSE(mid.left_scattered());
  EXPECT_FALSE(mid.right_scattered());
  const auto edge = T.classify(1);
  EXPECT_FALSE(edge.left_scattered());
  EXPECT_TRUE(edge.right_scattered());
  EXPECT_TRUE(T.is_left_scattered_max(2));
  EXPECT_FALSE(TimeScale::interval(0, 1).is_left_scattered_max(1));
}

TEST(Jumps, PropertyInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const TimeScale T = TimeScale::canonicalize(random_raw(rng));
    for (double t : T.points(0.25)) {
      const double s = T.sigma(t);
      const double r = T.rho(t);
      const auto pc = T.classify(t);
      EXPECT_TRUE(T.contains(s));
      EXPECT_TRUE(T.contains(r));
      EXPECT_GE(T.mu(t), 0.0);
      EXPECT_LE(r, t);
      if (t < T.max()) {
        EXPECT_EQ(s > t, pc.right_scattered()) << t;
        // Nothing of T lies strictly between t and sigma(t).
        EXPECT_FALSE(s > t && T.contains(0.5 * (s + t)));
      }
      if (t > T.min()) {
        EXPECT_EQ(r < t, pc.left_scattered()) << t;
      }
      if (s > t) {
        EXPECT_EQ(T.rho(s), t);
      }
      EXPECT_EQ(T.mu(t) == 0.0, s == t);
    }
  }
}

TEST(Restrict, Examples) {
  EXPECT_EQ(TimeScale::interval(0, 5).restrict(1, 3).segments(), segs({{1, 3}}));
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}, {4, 4}}));
  EXPECT_EQ(T.restrict(0, 4), T);
  const TimeScale U = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  EXPECT_EQ(U.restrict(0.5, 2).segments(), segs({{0.5, 1}, {2, 2}}));
}

TEST(Restrict, Errors) {
  const TimeScale T = TimeScale::canonicalize(segs({{0, 1}, {2, 3}}));
  expect_code(ErrorCode::kNotInScale, [&] { T.restrict(0, 1.5); });
  expect_code(ErrorCode::kBadInterval, [&] { T.restrict(2, 2); });
  expect_code(ErrorCode::kBadInterval, [&] { T.restrict(3, 0.5); });
}

TEST(Restrict, PropertyFullRangeIsIdentity) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const TimeScale T = TimeScale::canonicalize(random_raw(rng));
    if (T.min() < T.max()) {
      EXPECT_EQ(T.restrict(T.min(), T.max()), T);
    }
  }
}

TEST(ScalePoints, Examples) {
  const TimeScale L = TimeScale::canonicalize(segs({{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(L.points(0.1), (std::vector<double>{0, 1, 2}));
  const auto half = TimeScale::interval(0, 1).points(0.5);
  for (double t : {0.0, 0.5, 1.0}) EXPECT_NE(std::find(half.begin(), half.end(), t), half.end());
  const auto mixed = TimeScale::canonicalize(segs({{0, 1}, {3, 3}})).points(1.0);
  for (double t : {0.0, 1.0, 3.0}) EXPECT_NE(std::find(mixed.begin(), mixed.end(), t), mixed.end());
}

TEST(ScalePoints, PropertySortedCoveringAndFineEnough) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const TimeScale T = TimeScale::canonicalize(random_raw(rng));
    const double step = 0.3;
    const auto pts = T.points(step);
    EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
    EXPECT_EQ(std::adjacent_find(pts.begin(), pts.end()), pts.end());
    for (const auto& s : T.segments()) {
      EXPECT_NE(std::find(pts.begin(), pts.end(), s.lo), pts.end());
      EXPECT_NE(std::find(pts.begin(), pts.end(), s.hi), pts.end());
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      EXPECT_TRUE(T.contains(pts[i]));
      if (T.segment_of(pts[i]) == T.segment_of(pts[i + 1])) {
        EXPECT_LE(pts[i + 1] - pts[i], step * (1 + 1e-12));
      }
    }
  }
}

TEST(Constructors, LatticeAndGeometric) {
  const TimeScale L = TimeScale::lattice(0, 3, 1);
  EXPECT_EQ(L.segments(), segs({{0, 0}, {1, 1}, {2, 2}, {3, 3}}));
  const TimeScale Lf = TimeScale::lattice(0, 1, 0.1);
  EXPECT_EQ(Lf.segments().size(), 11u);
  EXPECT_EQ(Lf.max(), 1.0);
  const TimeScale G = TimeScale::geometric(2, 1, 16);
  EXPECT_EQ(G.segments(), segs({{1, 1}, {2, 2}, {4, 4}, {8, 8}, {16, 16}}));
  EXPECT_DOUBLE_EQ(G.mu(4), 4.0);
  expect_code(ErrorCode::kBadArgument, [] { TimeScale::geometric(1, 1, 2); });
  expect_code(ErrorCode::kBadInterval, [] { TimeScale::geometric(2, 0, 2); });
  expect_code(ErrorCode::kBadArgument, [] { TimeScale::lattice(0, 1, 0); });
  const TimeScale U = TimeScale::unite({TimeScale::interval(0, 1), L});
  EXPECT_EQ(U.segments(), segs({{0, 1}, {2, 2}, {3, 3}}));
  EXPECT_TRUE(L.is_discrete());
  EXPECT_FALSE(U.is_discrete());
}

TEST(Digest, StableAndSensitive) {
  const TimeScale a = TimeScale::lattice(0, 3, 1);
  EXPECT_EQ(chronoscale::scale_digest(a), chronoscale::scale_digest(TimeScale::lattice(0, 3, 1)));
  EXPECT_NE(chronoscale::scale_digest(a), chronoscale::scale_digest(TimeScale::lattice(0, 4, 1)));
  EXPECT_EQ(chronoscale::scale_digest(a).size(), 16u);
}
