// Command-line front end: eval, check, falsify, identities.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chronoscale/calculus.hpp"
#include "chronoscale/identities.hpp"
#include "chronoscale/inequalities.hpp"
#include "chronoscale/io.hpp"
#include "chronoscale/search.hpp"

namespace cs = chronoscale;

namespace {

constexpr const char* kToolVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kNotApplicable = 2, kViolation = 3 };

struct Common {
  std::vector<std::string> scales;
  std::string f;
  std::string g;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> m;
  std::optional<double> M;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> tol;
  std::optional<double> grid_step;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

struct Context {
  std::vector<std::string> argv;
  Common common;
};

std::optional<std::uint64_t> resolve_seed(const Common& c) {
  if (c.seed) return c.seed;
  if (const char* env = std::getenv("CHRONOSCALE_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
      throw cs::Error(cs::ErrorCode::kBadArgument, "CHRONOSCALE_SEED is not an unsigned integer");
    }
    return v;
  }
  return std::nullopt;
}

cs::Json run_metadata(const Context& ctx, std::optional<std::uint64_t> seed) {
  return cs::Json{{"tool_version", kToolVersion},
                  {"seed", seed ? cs::Json(*seed) : cs::Json(nullptr)},
                  {"argv", ctx.argv}};
}

void emit(const Context& ctx, const std::string& text) {
  if (ctx.common.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(ctx.common.out, std::ios::binary);
  if (!out) throw cs::Error(cs::ErrorCode::kBadArgument, "cannot write '" + ctx.common.out + "'");
  out << text;
}

void emit_report(const Context& ctx, const cs::Json& report, const std::vector<cs::Json>& rows,
                 const std::vector<std::string>& columns) {
  if (ctx.common.format == "csv") {
    emit(ctx, cs::to_csv(rows, columns));
  } else {
    emit(ctx, report.dump(2) + "\n");
  }
}

cs::TimeScale need_scale(const Common& c) {
  if (c.scales.empty()) throw cs::Error(cs::ErrorCode::kBadArgument, "--scale is required");
  return cs::parse_scales(c.scales);
}

cs::ScaleFunction need_function(const std::string& text, const char* flag) {
  if (text.empty()) throw cs::Error(cs::ErrorCode::kBadArgument, std::string(flag) + " is required");
  return cs::ScaleFunction::parse(text);
}

cs::CheckOptions check_options(const Common& c) {
  cs::CheckOptions o;
  if (c.tol) o.tol = *c.tol;
  o.grid_step = c.grid_step;
  return o;
}

// eval -----------------------------------------------------------------------

int run_eval(const Context& ctx, const std::string& op) {
  const Common& c = ctx.common;
  const cs::TimeScale T = need_scale(c);
  const double a = c.a.value_or(T.min());
  cs::Json r{{"op", op}, {"scale_digest", cs::scale_digest(T)}};
  if (op == "derivative") {
    const auto f = need_function(c.f, "--f");
    const auto d = cs::delta_derivative(f, T, a, c.tol.value_or(cs::kDefaultDerivativeTol));
    r["t"] = a;
    r["value"] = d.value;
    r["method"] = d.method == cs::DerivativeMethod::kExactScattered ? "exact_scattered" : "numeric_dense";
    r["err_estimate"] = d.err_estimate;
  } else if (op == "integral") {
    const auto f = need_function(c.f, "--f");
    const double b = c.b.value_or(T.max());
    const auto i = cs::delta_integral(f, T, a, b, c.tol.value_or(cs::kDefaultIntegralTol));
    r["a"] = a;
    r["b"] = b;
    r["value"] = i.value;
    r["discrete_part"] = i.discrete_part;
    r["continuous_part"] = i.continuous_part;
    r["err_estimate"] = i.err_estimate;
  } else if (op == "chain-rule") {
    const auto f = need_function(c.f, "--f");
    const auto g = need_function(c.g, "--g");
    const cs::Expr* e = f.expr();
    const cs::ScaleFunction fprime(cs::diff(*e));
    const auto d = cs::chain_rule_derivative(fprime, g, T, a, c.tol.value_or(cs::kDefaultDerivativeTol));
    r["t"] = a;
    r["outer_derivative"] = fprime.text();
    r["value"] = d.value;
    r["err_estimate"] = d.err_estimate;
  } else if (op == "point") {
    const cs::PointClass pc = T.classify(a);
    r["t"] = a;
    r["sigma"] = T.sigma(a);
    r["rho"] = T.rho(a);
    r["mu"] = T.mu(a);
    r["right_scattered"] = pc.right_scattered();
    r["left_scattered"] = pc.left_scattered();
  } else {
    throw cs::Error(cs::ErrorCode::kBadArgument, "unknown --op '" + op + "'");
  }
  r["run"] = run_metadata(ctx, resolve_seed(c));
  cs::Json row = r;
  row.erase("run");
  std::vector<std::string> cols;
  for (auto it = row.begin(); it != row.end(); ++it) cols.push_back(it.key());
  emit_report(ctx, r, {row}, cols);
  return kOk;
}

// check ----------------------------------------------------------------------

cs::Instance instance_from_flags(const Common& c, const std::string& theorem) {
  if (theorem.empty()) throw cs::Error(cs::ErrorCode::kBadArgument, "--theorem is required");
  cs::Instance in;
  in.theorem = cs::theorem_from_name(theorem);
  const cs::TimeScale T = need_scale(c);
  in.domain = cs::CheckDomain{T, c.a.value_or(T.min()), c.b.value_or(T.max())};
  in.f = need_function(c.f, "--f");
  if (!c.g.empty()) in.g = cs::ScaleFunction::parse(c.g);
  if (cs::theorem_uses_g(in.theorem) && !in.g) {
    throw cs::Error(cs::ErrorCode::kBadArgument, "--g is required for " + theorem);
  }
  if (!c.p) throw cs::Error(cs::ErrorCode::kBadArgument, "--p is required");
  in.p = *c.p;
  in.q = c.q;
  if (c.m.has_value() != c.M.has_value()) {
    throw cs::Error(cs::ErrorCode::kBadArgument, "give both --m and --M or neither");
  }
  if (c.m) in.bounds = cs::BoundsPair::make(*c.m, *c.M);
  return in;
}

int run_check(const Context& ctx, const std::string& theorem, const std::string& instance_path,
              bool witness) {
  const Common& c = ctx.common;
  cs::Instance in;
  if (!instance_path.empty()) {
    cs::Json j = cs::read_json_file(instance_path);
    if (j.contains("instance")) j = j.at("instance");
    in = cs::instance_from_json(j);
  } else {
    in = instance_from_flags(c, theorem);
  }
  const cs::CheckOptions opts = check_options(c);
  const cs::InequalityVerdict v = cs::check_instance(in, opts);
  cs::Json r = cs::verdict_to_json(v);
  if (witness) {
    if (in.theorem == cs::Theorem::kLiftedPower) {
      r["witness"] = cs::witness_to_json(cs::lifted_power_witness(in.domain, in.f, in.p, opts));
    } else if (in.theorem == cs::Theorem::kStrictPower) {
      r["witness"] = cs::witness_to_json(cs::strict_power_witness(in.domain, in.f, opts));
    } else {
      throw cs::Error(cs::ErrorCode::kBadArgument, "--witness applies to lifted_power and strict_power only");
    }
  }
  r["instance"] = cs::instance_to_json(in);
  r["run"] = run_metadata(ctx, resolve_seed(c));
  emit_report(ctx, r, {r},
              {"theorem", "applicable", "holds", "lhs", "rhs", "slack", "tol", "p", "q", "m", "M",
               "scale_digest", "function_text", "g_text"});
  if (!v.applicable) return kNotApplicable;
  return v.holds ? kOk : kViolation;
}

// falsify --------------------------------------------------------------------

struct FalsifyFlags {
  std::string theorem;
  std::size_t trials = 500;
  std::string family;
  std::optional<double> dense_fraction;
  unsigned threads = 0;
};

int run_falsify(const Context& ctx, const FalsifyFlags& ff) {
  const Common& c = ctx.common;
  cs::GenConfig cfg;
  const auto seed = resolve_seed(c);
  if (seed) cfg.seed = *seed;
  if (!ff.family.empty()) cfg.function_family = cs::family_from_name(ff.family);
  if (ff.dense_fraction) cfg.dense_fraction = *ff.dense_fraction;
  const cs::CheckOptions opts = check_options(c);

  std::vector<cs::Theorem> theorems;
  if (ff.theorem == "all") {
    theorems.assign(std::begin(cs::kAllTheorems), std::end(cs::kAllTheorems));
  } else {
    theorems.push_back(cs::theorem_from_name(ff.theorem));
  }
  std::vector<cs::Json> reports;
  bool any_violation = false;
  for (cs::Theorem t : theorems) {
    const cs::CampaignReport rep = cs::run_campaign(t, cfg, ff.trials, opts, ff.threads);
    any_violation = any_violation || rep.violation_count() > 0;
    reports.push_back(cs::campaign_to_json(rep, cfg));
  }
  cs::Json out = reports.size() == 1 ? reports.front() : cs::Json{{"campaigns", reports}};
  out["run"] = run_metadata(ctx, cfg.seed);
  emit_report(ctx, out, reports,
              {"theorem", "trials", "applicable", "holds", "violations", "hypothesis_failures",
               "errors", "numerical_artifacts", "min_slack", "min_relative_slack"});
  return any_violation ? kViolation : kOk;
}

// identities -----------------------------------------------------------------

int run_identities(const Context& ctx) {
  const Common& c = ctx.common;
  const cs::TimeScale T = need_scale(c);
  const auto f = need_function(c.f, "--f");
  const auto g = c.g.empty() ? cs::ScaleFunction::parse("x") : cs::ScaleFunction::parse(c.g);
  cs::IdentitySweepOptions opts;
  if (c.tol) {
    opts.integral_tol = *c.tol;
    opts.derivative_tol = std::max(*c.tol, cs::kDefaultDerivativeTol);
  }
  const auto sweeps = cs::identity_sweep(f, g, T, opts);
  cs::Json rows = cs::Json::array();
  std::vector<cs::Json> csv_rows;
  bool all_pass = true;
  for (const auto& s : sweeps) {
    cs::Json row{{"identity", s.name},
                 {"tol", s.tol},
                 {"evaluations", s.evaluations},
                 {"max_residual", s.worst.residual},
                 {"scale", s.worst.scale},
                 {"max_ratio", s.max_ratio},
                 {"worst_at", s.worst_at ? cs::Json(*s.worst_at) : cs::Json(nullptr)},
                 {"pass", s.pass},
                 {"skipped", s.skipped}};
    all_pass = all_pass && s.pass;
    rows.push_back(row);
    csv_rows.push_back(row);
  }
  cs::Json out{{"identities", rows},
               {"all_pass", all_pass},
               {"scale_digest", cs::scale_digest(T)},
               {"function_text", f.text()},
               {"g_text", g.text()},
               {"run", run_metadata(ctx, resolve_seed(c))}};
  emit_report(ctx, out, csv_rows,
              {"identity", "tol", "evaluations", "max_residual", "scale", "max_ratio", "worst_at",
               "pass", "skipped"});
  return all_pass ? kOk : kViolation;
}

void add_common(CLI::App* sub, Common& c, bool functions, bool exponents) {
  sub->add_option("--scale", c.scales,
                  "Scale: interval:a..b, lattice:a..b:step, geometric:q:min..max or file:path "
                  "(repeat to unite)");
  if (functions) {
    sub->add_option("--f", c.f, "Function of x");
    sub->add_option("--g", c.g, "Second function of x");
  }
  if (exponents) {
    sub->add_option("--p", c.p, "Exponent p");
    sub->add_option("--q", c.q, "Conjugate exponent q (default p/(p-1))");
    sub->add_option("--m", c.m, "Lower ratio bound m");
    sub->add_option("--M", c.M, "Upper ratio bound M");
  }
  sub->add_option("--a", c.a, "Left limit or evaluation point (default: min of scale)");
  sub->add_option("--b", c.b, "Right limit (default: max of scale)");
  sub->add_option("--tol", c.tol, "Tolerance");
  sub->add_option("--grid-step", c.grid_step, "Hypothesis sampling step on dense segments");
  sub->add_option("--seed", c.seed, "Seed (falls back to CHRONOSCALE_SEED)");
  sub->add_option("--out", c.out, "Write the report here instead of stdout");
  sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  for (int i = 1; i < argc; ++i) ctx.argv.emplace_back(argv[i]);

  CLI::App app{"Time-scale calculus engine and inequality checker"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string op = "integral";
  auto* eval = app.add_subcommand("eval", "Delta derivative, delta integral, chain rule or point data");
  eval->add_option("--op", op, "derivative | integral | chain-rule | point")
      ->check(CLI::IsMember({"derivative", "integral", "chain-rule", "point"}));
  add_common(eval, ctx.common, true, false);

  std::string theorem;
  std::string instance_path;
  bool witness = false;
  auto* check = app.add_subcommand("check", "Check one inequality instance");
  check->add_option("--theorem", theorem, "holder | ratio_holder | bounded_ratio | power_bounded | integral_power | lifted_power | pm_bound | strict_power");
  check->add_option("--instance", instance_path, "Replay an instance or trial record JSON");
  check->add_flag("--witness", witness, "Add the monotone-witness diagnostics (lifted_power, strict_power)");
  add_common(check, ctx.common, true, true);

  FalsifyFlags ff;
  auto* falsify = app.add_subcommand("falsify", "Randomized campaign over admissible instances");
  falsify->add_option("--theorem", ff.theorem, "Theorem name or 'all'")->required();
  falsify->add_option("--trials", ff.trials, "Trials per theorem")->check(CLI::PositiveNumber);
  falsify->add_option("--family", ff.family, "polynomial | exp_mix | cumulative_construction");
  falsify->add_option("--dense-fraction", ff.dense_fraction, "Probability of a dense component")
      ->check(CLI::Range(0.0, 1.0));
  falsify->add_option("--threads", ff.threads, "Worker threads (0: all cores)");
  add_common(falsify, ctx.common, false, false);

  auto* identities = app.add_subcommand("identities", "Residual sweep of calculus identities");
  add_common(identities, ctx.common, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*eval) return run_eval(ctx, op);
    if (*check) return run_check(ctx, theorem, instance_path, witness);
    if (*falsify) return run_falsify(ctx, ff);
    if (*identities) return run_identities(ctx);
  } catch (const cs::SyntaxError& e) {
    std::cerr << "chronoscale: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "chronoscale: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
