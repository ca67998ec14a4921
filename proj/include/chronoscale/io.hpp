#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "chronoscale/error.hpp"
#include "chronoscale/format.hpp"
#include "chronoscale/inequalities.hpp"
#include "chronoscale/scale_function.hpp"
#include "chronoscale/search.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

using Json = nlohmann::json;

namespace detail {

inline double json_real(const Json& j, std::string_view what) {
  if (!j.is_number()) throw Error(ErrorCode::kBadArgument, std::string(what) + " must be a number");
  return j.get<double>();
}

inline Json optional_real(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return json_real(j.at(key), key);
}

inline std::vector<Segment> raw_segments(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kBadArgument, "scale description must be an object");
  if (j.contains("segments")) {
    std::vector<Segment> out;
    for (const Json& s : j.at("segments")) {
      if (!s.is_array() || s.size() != 2) {
        throw Error(ErrorCode::kBadArgument, "each segment must be a [lo, hi] pair");
      }
      out.push_back({json_real(s[0], "segment lo"), json_real(s[1], "segment hi")});
    }
    return out;
  }
  const auto parts = [](const TimeScale& T) { return T.segments(); };
  if (j.contains("interval")) {
    const Json& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2) throw Error(ErrorCode::kBadArgument, "interval must be [a, b]");
    return parts(TimeScale::interval(json_real(iv[0], "interval a"), json_real(iv[1], "interval b")));
  }
  if (j.contains("lattice")) {
    const Json& l = j.at("lattice");
    return parts(TimeScale::lattice(json_real(l.at("start"), "start"), json_real(l.at("stop"), "stop"),
                                    json_real(l.at("step"), "step")));
  }
  if (j.contains("geometric")) {
    const Json& g = j.at("geometric");
    return parts(TimeScale::geometric(json_real(g.at("q"), "q"), json_real(g.at("min"), "min"),
                                      json_real(g.at("max"), "max")));
  }
  if (j.contains("union")) {
    std::vector<Segment> out;
    for (const Json& part : j.at("union")) {
      auto seg = raw_segments(part);
      out.insert(out.end(), seg.begin(), seg.end());
    }
    return out;
  }
  throw Error(ErrorCode::kBadArgument,
              "scale needs one of segments, interval, lattice, geometric, union");
}

}  // namespace detail

/// Scale description: {"segments": [[lo,hi],...]}, {"interval": [a,b]},
/// {"lattice": {"start","stop","step"}}, {"geometric": {"q","min","max"}} or
/// {"union": [...]}, with an optional top-level "snap" tolerance.
inline TimeScale scale_from_json(const Json& j) {
  double snap = 0.0;
  if (j.is_object() && j.contains("snap")) snap = detail::json_real(j.at("snap"), "snap");
  return TimeScale::canonicalize(detail::raw_segments(j), snap);
}

inline Json scale_to_json(const TimeScale& T) {
  Json segs = Json::array();
  for (const auto& s : T.segments()) segs.push_back({s.lo, s.hi});
  return Json{{"segments", std::move(segs)}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadArgument, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBadArgument, "invalid JSON in '" + path + "': " + e.what());
  }
}

inline TimeScale load_scale_file(const std::string& path) { return scale_from_json(read_json_file(path)); }

namespace detail {

inline double shorthand_real(std::string_view text, std::string_view spec) {
  const auto v = parse_real(text);
  if (!v) {
    throw Error(ErrorCode::kBadArgument,
                "bad number '" + std::string(text) + "' in scale '" + std::string(spec) + "'");
  }
  return *v;
}

inline std::pair<std::string_view, std::string_view> split_range(std::string_view text,
                                                                 std::string_view spec) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    throw Error(ErrorCode::kBadArgument, "expected lo..hi in scale '" + std::string(spec) + "'");
  }
  return {text.substr(0, dots), text.substr(dots + 2)};
}

}  // namespace detail

/// Command-line scale: interval:a..b, lattice:a..b:step, geometric:q:min..max
/// or file:path.
inline TimeScale parse_scale_shorthand(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kBadArgument, "scale '" + std::string(spec) + "' has no kind prefix");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  if (kind == "file") return load_scale_file(std::string(rest));
  if (kind == "interval") {
    const auto [lo, hi] = detail::split_range(rest, spec);
    return TimeScale::interval(detail::shorthand_real(lo, spec), detail::shorthand_real(hi, spec));
  }
  if (kind == "lattice") {
    const auto last = rest.rfind(':');
    if (last == std::string_view::npos) {
      throw Error(ErrorCode::kBadArgument, "lattice scale needs a..b:step");
    }
    const auto [lo, hi] = detail::split_range(rest.substr(0, last), spec);
    return TimeScale::lattice(detail::shorthand_real(lo, spec), detail::shorthand_real(hi, spec),
                              detail::shorthand_real(rest.substr(last + 1), spec));
  }
  if (kind == "geometric") {
    const auto sep = rest.find(':');
    if (sep == std::string_view::npos) {
      throw Error(ErrorCode::kBadArgument, "geometric scale needs q:min..max");
    }
    const auto [lo, hi] = detail::split_range(rest.substr(sep + 1), spec);
    return TimeScale::geometric(detail::shorthand_real(rest.substr(0, sep), spec),
                                detail::shorthand_real(lo, spec), detail::shorthand_real(hi, spec));
  }
  throw Error(ErrorCode::kBadArgument, "unknown scale kind '" + std::string(kind) + "'");
}

/// Union of several shorthands, merged by canonicalize.
inline TimeScale parse_scales(const std::vector<std::string>& specs) {
  if (specs.empty()) throw Error(ErrorCode::kEmptyScale, "no scale given");
  std::vector<TimeScale> parts;
  for (const auto& s : specs) parts.push_back(parse_scale_shorthand(s));
  return TimeScale::unite(parts);
}

inline Json function_to_json(const ScaleFunction& f) {
  if (const Tabulation* t = f.tabulation()) {
    return Json{{"tabulation", {{"knots", t->knots()}, {"values", t->values()}}}};
  }
  if (f.expr()) return Json{{"expr", f.text()}};
  throw Error(ErrorCode::kBadArgument, "function '" + f.text() + "' has no serializable form");
}

inline ScaleFunction function_from_json(const Json& j, const TimeScale& domain) {
  if (j.is_string()) return ScaleFunction::parse(j.get<std::string>());
  if (j.is_object() && j.contains("expr")) return ScaleFunction::parse(j.at("expr").get<std::string>());
  if (j.is_object() && j.contains("tabulation")) {
    const Json& t = j.at("tabulation");
    return ScaleFunction(Tabulation(domain, t.at("knots").get<std::vector<double>>(),
                                    t.at("values").get<std::vector<double>>()));
  }
  throw Error(ErrorCode::kBadArgument, "function needs an expr or a tabulation");
}

inline Json hypothesis_to_json(const HypothesisReport& h) {
  return Json{{"name", h.name},
              {"satisfied", h.satisfied},
              {"margin", h.margin},
              {"witness_point", detail::optional_real(h.witness_point)},
              {"strict", h.strict}};
}

inline Json verdict_to_json(const InequalityVerdict& v) {
  Json hyps = Json::array();
  for (const auto& h : v.hypotheses) hyps.push_back(hypothesis_to_json(h));
  Json steps = Json::array();
  for (const auto& s : v.steps) {
    steps.push_back({{"name", s.name}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"slack", s.slack}, {"holds", s.holds}});
  }
  Json flags = Json::object();
  for (const auto& [name, value] : v.flags) flags[name] = value;
  Json j{{"theorem", v.theorem},
         {"hypotheses", std::move(hyps)},
         {"lhs", v.lhs},
         {"rhs", v.rhs},
         {"slack", v.slack},
         {"holds", v.holds},
         {"applicable", v.applicable},
         {"strict_required", v.strict_required},
         {"tol", v.tol},
         {"scale_digest", v.scale_digest},
         {"function_text", v.function_text},
         {"p", detail::optional_real(v.p)},
         {"q", detail::optional_real(v.q)},
         {"m", detail::optional_real(v.m)},
         {"M", detail::optional_real(v.M)},
         {"steps", std::move(steps)},
         {"flags", std::move(flags)},
         {"note", v.note}};
  if (!v.g_text.empty()) j["g_text"] = v.g_text;
  return j;
}

inline Json witness_to_json(const WitnessReport& w) {
  Json checks = Json::array();
  for (const auto& c : w.checks) checks.push_back(hypothesis_to_json(c));
  return Json{{"witness", w.name}, {"all_pass", w.all_pass}, {"checks", std::move(checks)}};
}

/// Self-contained replay record: everything check_instance needs.
inline Json instance_to_json(const Instance& in) {
  Json j{{"theorem", theorem_name(in.theorem)},
         {"scale", scale_to_json(in.domain.scale)},
         {"a", in.domain.a},
         {"b", in.domain.b},
         {"f", function_to_json(in.f)},
         {"p", in.p},
         {"q", detail::optional_real(in.q)}};
  if (in.g) j["g"] = function_to_json(*in.g);
  if (in.bounds) {
    j["m"] = in.bounds->m;
    j["M"] = in.bounds->M;
  }
  return j;
}

inline Instance instance_from_json(const Json& j) {
  Instance in;
  in.theorem = theorem_from_name(j.at("theorem").get<std::string>());
  const TimeScale T = scale_from_json(j.at("scale"));
  in.domain = CheckDomain{T, detail::read_optional(j, "a").value_or(T.min()),
                          detail::read_optional(j, "b").value_or(T.max())};
  in.f = function_from_json(j.at("f"), T);
  if (j.contains("g") && !j.at("g").is_null()) in.g = function_from_json(j.at("g"), T);
  in.p = detail::json_real(j.at("p"), "p");
  in.q = detail::read_optional(j, "q");
  const auto m = detail::read_optional(j, "m");
  const auto M = detail::read_optional(j, "M");
  if (m.has_value() != M.has_value()) throw Error(ErrorCode::kBadArgument, "give both m and M or neither");
  if (m) in.bounds = BoundsPair::make(*m, *M);
  return in;
}

inline Json config_to_json(const GenConfig& cfg) {
  return Json{{"seed", cfg.seed},
              {"n_segments", {cfg.n_segments.lo, cfg.n_segments.hi}},
              {"dense_fraction", cfg.dense_fraction},
              {"domain_span", cfg.domain_span},
              {"function_family", cfg.function_family ? Json(family_name(*cfg.function_family)) : Json(nullptr)},
              {"p_range", {cfg.p_range.lo, cfg.p_range.hi}},
              {"negative_p_fraction", cfg.negative_p_fraction}};
}

inline Json trial_to_json(const TrialRecord& r) {
  Json j{{"trial", r.trial},
         {"family", r.generated.family},
         {"equality_case", r.generated.equality_case},
         {"instance", instance_to_json(r.generated.instance)},
         {"verdict", verdict_to_json(r.verdict)}};
  if (r.recheck) j["recheck"] = verdict_to_json(*r.recheck);
  return j;
}

inline Json campaign_to_json(const CampaignReport& r, const GenConfig& cfg) {
  Json violations = Json::array();
  for (const auto& v : r.violations) violations.push_back(trial_to_json(v));
  Json errors = Json::array();
  for (const auto& [trial, msg] : r.error_messages) errors.push_back({{"trial", trial}, {"message", msg}});
  const auto finite_or_null = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"theorem", r.theorem},
              {"config", config_to_json(cfg)},
              {"trials", r.trials},
              {"applicable", r.applicable},
              {"holds", r.holds},
              {"violations", r.violation_count()},
              {"hypothesis_failures", r.hypothesis_failures},
              {"errors", r.errors},
              {"numerical_artifacts", r.numerical_artifacts},
              {"equality_trials", r.equality_trials},
              {"equality_max_relative_slack", r.equality_max_relative_slack},
              {"min_slack", finite_or_null(r.min_slack)},
              {"min_relative_slack", finite_or_null(r.min_relative_slack)},
              {"min_slack_instance", r.min_slack_instance ? trial_to_json(*r.min_slack_instance) : Json(nullptr)},
              {"violating_instances", std::move(violations)},
              {"error_messages", std::move(errors)}};
}

namespace detail {

inline std::string csv_field(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  return v.dump();
}

}  // namespace detail

/// Header plus one row per record, columns taken from the keys listed.
inline std::string to_csv(const std::vector<Json>& rows, const std::vector<std::string>& columns) {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const Json& r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "") << (r.contains(columns[i]) ? detail::csv_field(r.at(columns[i])) : "");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace chronoscale
