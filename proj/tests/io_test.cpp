#include <gtest/gtest.h>

#include "chronoscale/io.hpp"

using namespace chronoscale;

namespace {

std::string data(const char* name) { return std::string(CHRONOSCALE_DATA_DIR) + "/" + name; }

}  // namespace

TEST(ScaleJson, Forms) {
  const auto mixed = scale_from_json(Json::parse(R"({"segments": [[3, 4], [0, 1], [2, 2]]})"));
  EXPECT_EQ(mixed, TimeScale::canonicalize({{0, 1}, {2, 2}, {3, 4}}));
  EXPECT_EQ(scale_from_json(Json::parse(R"({"interval": [0, 2]})")), TimeScale::interval(0, 2));
  EXPECT_EQ(scale_from_json(Json::parse(R"({"lattice": {"start": 0, "stop": 1, "step": 0.25}})")),
            TimeScale::lattice(0, 1, 0.25));
  EXPECT_EQ(scale_from_json(Json::parse(R"({"geometric": {"q": 2, "min": 1, "max": 8}})")),
            TimeScale::geometric(2, 1, 8));
  const auto snapped =
      scale_from_json(Json::parse(R"({"segments": [[0, 1], [1.0000001, 2]], "snap": 1e-6})"));
  EXPECT_EQ(snapped.segments().size(), 1u);
  EXPECT_EQ(scale_from_json(scale_to_json(mixed)), mixed);
}

TEST(ScaleJson, Errors) {
  for (const char* bad : {R"([1, 2])", R"({"segments": [[0]]})", R"({"interval": [0]})",
                          R"({"segments": [["a", 1]]})", R"({"cantor": 1})",
                          R"({"segments": []})", R"({"segments": [[2, 1]]})"}) {
    EXPECT_THROW(scale_from_json(Json::parse(bad)), Error) << bad;
  }
}

TEST(ScaleJson, Files) {
  EXPECT_EQ(load_scale_file(data("mixed.json")), TimeScale::canonicalize({{0, 1}, {2, 2}, {3, 4}}));
  const TimeScale u = load_scale_file(data("union.json"));
  EXPECT_EQ(u.segments().size(), 1u + 3u + 3u);
  EXPECT_EQ(u.max(), 32.0);
  EXPECT_THROW(load_scale_file(data("missing.json")), Error);
}

TEST(Shorthand, Kinds) {
  EXPECT_EQ(parse_scale_shorthand("interval:0..1"), TimeScale::interval(0, 1));
  EXPECT_EQ(parse_scale_shorthand("lattice:0..3:1"), TimeScale::lattice(0, 3, 1));
  EXPECT_EQ(parse_scale_shorthand("lattice:-1..1:0.5"), TimeScale::lattice(-1, 1, 0.5));
  EXPECT_EQ(parse_scale_shorthand("geometric:2:1..16"), TimeScale::geometric(2, 1, 16));
  EXPECT_EQ(parse_scale_shorthand("file:" + data("mixed.json")),
            TimeScale::canonicalize({{0, 1}, {2, 2}, {3, 4}}));
  EXPECT_EQ(parse_scales({"interval:0..1", "lattice:2..4:1"}),
            TimeScale::canonicalize({{0, 1}, {2, 2}, {3, 3}, {4, 4}}));
  for (const char* bad : {"interval", "interval:0-1", "lattice:0..3", "lattice:0..x:1",
                          "geometric:2", "cloud:0..1", "interval:1..0"}) {
    EXPECT_THROW(parse_scale_shorthand(bad), Error) << bad;
  }
  EXPECT_THROW(parse_scales({}), Error);
}

TEST(FunctionJson, RoundTrip) {
  const TimeScale T = TimeScale::lattice(0, 2, 1);
  const auto e = function_from_json(function_to_json(ScaleFunction::parse("x^2+1")), T);
  EXPECT_EQ(e(2), 5.0);
  const ScaleFunction tab(Tabulation(T, {0, 1, 2}, {1, 4, 9}));
  const auto t = function_from_json(function_to_json(tab), T);
  ASSERT_NE(t.tabulation(), nullptr);
  EXPECT_EQ(t(1), 4.0);
  EXPECT_EQ(function_from_json(Json("sin(x)"), T)(0), 0.0);
  EXPECT_THROW(function_from_json(Json::object(), T), Error);
  const auto opaque = ScaleFunction::from_callable([](double x) { return x; }, "opaque");
  EXPECT_THROW(function_to_json(opaque), Error);
}

TEST(InstanceJson, RoundTripReproducesVerdict) {
  const Instance in = instance_from_json(read_json_file(data("lifted_power_instance.json")));
  EXPECT_EQ(in.theorem, Theorem::kLiftedPower);
  const auto v = check_instance(in);
  EXPECT_EQ(v.lhs, 153.0);
  EXPECT_EQ(v.rhs, 81.0);

  Instance two;
  two.theorem = Theorem::kBoundedRatio;
  two.domain = {TimeScale::lattice(0, 2, 1), 0, 2};
  two.f = ScaleFunction::parse("x+1");
  two.g = ScaleFunction::constant(1);
  two.p = 2;
  two.q = 2;
  two.bounds = BoundsPair::make(1, 3);
  const Json j = instance_to_json(two);
  const Instance back = instance_from_json(Json::parse(j.dump()));
  EXPECT_EQ(instance_to_json(back).dump(), j.dump());
  EXPECT_EQ(check_instance(back).slack, check_instance(two).slack);

  Json half = j;
  half.erase("M");
  EXPECT_THROW(instance_from_json(half), Error);
}

TEST(VerdictJson, Schema) {
  const auto v = check_pm_bound({TimeScale::lattice(0, 2, 1), 0, 2}, ScaleFunction::parse("x+1"),
                                ExponentPair::from_p(2));
  const Json j = verdict_to_json(v);
  for (const char* key : {"theorem", "hypotheses", "lhs", "rhs", "slack", "holds", "applicable",
                          "strict_required", "tol", "scale_digest", "function_text", "p", "q", "m",
                          "M", "steps", "flags", "note"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_FALSE(j.contains("g_text"));
  EXPECT_EQ(j["theorem"], "pm_bound");
  EXPECT_EQ(j["steps"].size(), 2u);
  EXPECT_TRUE(j["flags"]["bounds_estimated"].get<bool>());
  for (const auto& h : j["hypotheses"]) {
    for (const char* key : {"name", "satisfied", "margin", "witness_point", "strict"}) {
      EXPECT_TRUE(h.contains(key)) << key;
    }
  }
  // Sides of a gated verdict whose evaluation failed serialize as null.
  const auto gated = check_integral_power({TimeScale::lattice(0, 2, 1), 0, 2}, ScaleFunction::parse("x-1"), 1.5);
  EXPECT_FALSE(gated.applicable);
  const Json g = Json::parse(verdict_to_json(gated).dump());
  EXPECT_TRUE(g["lhs"].is_null());
}

TEST(Csv, QuotingAndColumns) {
  const std::vector<Json> rows{{{"name", "a,b"}, {"value", 1.5}},
                               {{"name", "say \"hi\""}, {"value", nullptr}},
                               {{"name", "plain"}}};
  EXPECT_EQ(to_csv(rows, {"name", "value"}),
            "name,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",\nplain,\n");
}
