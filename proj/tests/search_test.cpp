#include <gtest/gtest.h>

#include <set>

#include "chronoscale/io.hpp"
#include "chronoscale/search.hpp"

using namespace chronoscale;

TEST(TrialRng, DeterministicAndKeyed) {
  TrialRng a(7, 1, 3), b(7, 1, 3), c(7, 1, 4), d(7, 2, 3);
  std::set<double> seen;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(c.uniform(), d.uniform());
  TrialRng r(1, 1, 1);
  std::set<int> ints;
  for (int i = 0; i < 500; ++i) ints.insert(r.integer(-2, 2));
  EXPECT_EQ(ints, (std::set<int>{-2, -1, 0, 1, 2}));
}

TEST(GenScale, DeterministicPerIndex) {
  GenConfig cfg;
  std::set<std::string> digests;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const TimeScale x = gen_scale(cfg, i);
    EXPECT_EQ(x, gen_scale(cfg, i));
    digests.insert(scale_digest(x));
  }
  EXPECT_GT(digests.size(), 45u);
  GenConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(gen_scale(cfg, 0), gen_scale(other, 0));
}

TEST(GenScale, ShapeProperties) {
  GenConfig cfg;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const TimeScale T = gen_scale(cfg, i);
    EXPECT_GE(T.points(1.0).size(), 2u);
    EXPECT_GE(T.min(), 0.0);
    EXPECT_NEAR(T.max() - T.min(), cfg.domain_span, 1e-9);
  }
  cfg.dense_fraction = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_TRUE(gen_scale(cfg, i).is_discrete());
  cfg.dense_fraction = 1.0;
  cfg.n_segments = {1, 1};
  for (std::uint64_t i = 0; i < 50; ++i) {
    const TimeScale T = gen_scale(cfg, i);
    ASSERT_EQ(T.segments().size(), 1u);
    EXPECT_FALSE(T.segments()[0].is_point());
  }
}

TEST(GenConfig, Validation) {
  GenConfig cfg;
  cfg.n_segments = {0, 3};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.dense_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.p_range = {0.5, 2};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.domain_span = 0;
  EXPECT_THROW(gen_scale(cfg, 0), Error);
  EXPECT_EQ(family_from_name(family_name(FunctionFamily::kExpMix)), FunctionFamily::kExpMix);
  EXPECT_THROW(family_from_name("spline"), Error);
}

TEST(GenAdmissible, PassesTheHypothesisGate) {
  GenConfig cfg;
  cfg.seed = 5;
  for (Theorem th : kAllTheorems) {
    int gated = 0;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const auto gen = gen_admissible(th, gen_scale(cfg, i), cfg, i);
      const auto v = check_instance(gen.instance);
      if (!v.applicable) {
        ++gated;
        for (const auto& h : v.hypotheses) {
          if (!h.satisfied) ADD_FAILURE() << theorem_name(th) << " #" << i << ": " << h.name;
        }
      }
    }
    EXPECT_EQ(gated, 0) << theorem_name(th);
  }
}

TEST(GenAdmissible, FamiliesFollowTheConfig) {
  GenConfig cfg;
  cfg.function_family = FunctionFamily::kPolynomial;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto gen = gen_admissible(Theorem::kIntegralPower, gen_scale(cfg, i), cfg, i);
    EXPECT_EQ(gen.family, "polynomial");
    EXPECT_NE(gen.instance.f.expr(), nullptr);
  }
  cfg.function_family = FunctionFamily::kCumulative;
  const auto gen = gen_admissible(Theorem::kPmBound, gen_scale(cfg, 0), cfg, 0);
  EXPECT_NE(gen.instance.f.tabulation(), nullptr);
}

TEST(GenAdmissible, CumulativeSlopeBuildsLinearFunctionOnLattice) {
  // sigma^Delta = 1 on a step-1 lattice, so slope 1 + sigma^Delta from f0 =
  // mu(0) is 2x + 1.
  const TimeScale T = TimeScale::lattice(0, 5, 1);
  const auto f = detail::cumulative(T, T.mu(0), [&](double t, double next) {
    return 1.0 + (T.sigma(next) - next) / (next - t);
  });
  for (double x : {0.0, 1.0, 2.0, 3.0, 4.0}) EXPECT_EQ(f(x), 2 * x + 1);
}

TEST(GenAdmissible, EqualityCasesAreTight) {
  GenConfig cfg;
  for (Theorem th : {Theorem::kHolder, Theorem::kRatioHolder}) {
    int equality = 0;
    for (std::uint64_t i = 0; i < 60; ++i) {
      const auto gen = gen_admissible(th, gen_scale(cfg, i), cfg, i);
      if (!gen.equality_case) continue;
      ++equality;
      const auto v = check_instance(gen.instance);
      EXPECT_LE(std::abs(v.relative_slack()), v.tol) << theorem_name(th) << " #" << i;
    }
    EXPECT_GT(equality, 5) << theorem_name(th);
  }
}

TEST(Campaign, IndependentOfThreadCount) {
  GenConfig cfg;
  cfg.seed = 9;
  for (Theorem th : {Theorem::kIntegralPower, Theorem::kHolder}) {
    const auto one = run_campaign(th, cfg, 40, {}, 1);
    const auto many = run_campaign(th, cfg, 40, {}, 3);
    EXPECT_EQ(campaign_to_json(one, cfg).dump(), campaign_to_json(many, cfg).dump());
  }
}

TEST(Campaign, CountsAddUp) {
  GenConfig cfg;
  for (Theorem th : kAllTheorems) {
    const auto r = run_campaign(th, cfg, 60, {}, 1);
    EXPECT_EQ(r.errors, 0u) << theorem_name(th);
    EXPECT_EQ(r.applicable + r.hypothesis_failures + r.errors, r.trials);
    EXPECT_EQ(r.holds + r.violation_count(), r.applicable);
    EXPECT_LE(r.numerical_artifacts, r.holds);
  }
}

TEST(Campaign, ViolationsReplayFromTheirRecord) {
  // Purely discrete scales with a wide first gap break the strict inequality
  // with f(a) = 0; the campaign must surface them and the record must
  // reproduce the verdict.
  GenConfig cfg;
  const auto r = run_campaign(Theorem::kStrictPower, cfg, 200, {}, 1);
  ASSERT_FALSE(r.violations.empty());
  for (const auto& rec : r.violations) {
    EXPECT_TRUE(rec.generated.instance.domain.scale.is_discrete());
    const auto again = check_instance(rec.generated.instance);
    EXPECT_EQ(again.lhs, rec.verdict.lhs);
    EXPECT_EQ(again.rhs, rec.verdict.rhs);
    EXPECT_TRUE(again.violated());
    const auto round = instance_from_json(instance_to_json(rec.generated.instance));
    const auto replay = check_instance(round);
    EXPECT_EQ(replay.lhs, rec.verdict.lhs);
    EXPECT_EQ(replay.rhs, rec.verdict.rhs);
    const auto regen = gen_admissible(Theorem::kStrictPower, gen_scale(cfg, rec.trial), cfg, rec.trial);
    EXPECT_EQ(check_instance(regen.instance).slack, rec.verdict.slack);
  }
}
