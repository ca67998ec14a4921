#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "chronoscale/calculus.hpp"
#include "chronoscale/error.hpp"
#include "chronoscale/expr.hpp"
#include "chronoscale/inequalities.hpp"
#include "chronoscale/scale_function.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

enum class FunctionFamily { kPolynomial, kExpMix, kCumulative };

inline std::string_view family_name(FunctionFamily f) {
  switch (f) {
    case FunctionFamily::kPolynomial: return "polynomial";
    case FunctionFamily::kExpMix: return "exp_mix";
    case FunctionFamily::kCumulative: return "cumulative_construction";
  }
  return "unknown";
}

inline FunctionFamily family_from_name(std::string_view name) {
  for (auto f : {FunctionFamily::kPolynomial, FunctionFamily::kExpMix, FunctionFamily::kCumulative}) {
    if (family_name(f) == name) return f;
  }
  throw Error(ErrorCode::kBadArgument, "unknown function family '" + std::string(name) + "'");
}

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct RealRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct GenConfig {
  std::uint64_t seed = 42;
  IntRange n_segments{2, 6};
  double dense_fraction = 0.5;
  double domain_span = 4.0;
  /// Unset: families rotate with the instance index.
  std::optional<FunctionFamily> function_family;
  RealRange p_range{1.1, 4.0};
  /// Share of exponents drawn from the reverse regime p < 0, for checks that
  /// admit it.
  double negative_p_fraction = 0.25;

  void validate() const {
    if (n_segments.lo < 1 || n_segments.lo > n_segments.hi) {
      throw Error(ErrorCode::kBadArgument, "n_segments range must be nonempty and >= 1");
    }
    for (double pr : {dense_fraction, negative_p_fraction}) {
      if (!(pr >= 0.0 && pr <= 1.0)) {
        throw Error(ErrorCode::kBadArgument, "probabilities must lie in [0,1]");
      }
    }
    if (!(domain_span > 0.0) || !std::isfinite(domain_span)) {
      throw Error(ErrorCode::kBadArgument, "domain_span must be positive");
    }
    if (!(p_range.lo <= p_range.hi) || !(p_range.lo > 1.0) || !std::isfinite(p_range.hi)) {
      throw Error(ErrorCode::kBadArgument, "p_range must be a nonempty subset of (1, inf)");
    }
  }
};

/// Deterministic random source keyed by (seed, stream, index).
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
      : engine_(mix(mix(mix(seed) ^ stream) ^ index)) {}

  /// Uniform in [0, 1) from the top 53 bits; independent of the standard
  /// library's distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  bool chance(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

namespace detail {
inline constexpr std::uint64_t kScaleStream = 0x5ca1e;
inline constexpr std::uint64_t kFunctionStream = 0xf00c;
}  // namespace detail

/// Random bounded scale: n components laid out left to right over roughly
/// domain_span, each a dense interval (probability dense_fraction), an
/// arithmetic cluster or a geometric cluster. Always holds >= 2 points.
inline TimeScale gen_scale(const GenConfig& cfg, std::uint64_t index) {
  cfg.validate();
  TrialRng rng(cfg.seed, detail::kScaleStream, index);
  const int n = rng.integer(cfg.n_segments.lo, cfg.n_segments.hi);
  std::vector<double> weights(static_cast<std::size_t>(2 * n - 1));
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    // Even slots are components, odd slots are gaps (kept shorter).
    weights[i] = i % 2 == 0 ? rng.uniform(0.5, 1.5) : rng.uniform(0.1, 0.5);
    total += weights[i];
  }
  // Nonnegative origin keeps sigma >= 0, which one of the checks requires.
  const double origin = std::round(rng.uniform(0.0, 2.0) * 8.0) / 8.0;
  std::vector<Segment> raw;
  double cursor = origin;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double width = cfg.domain_span * weights[i] / total;
    if (i % 2 == 1) {
      cursor += width;
      continue;
    }
    const double lo = cursor;
    const double hi = cursor + width;
    if (rng.chance(cfg.dense_fraction)) {
      raw.push_back({lo, hi});
    } else if (rng.chance(0.5)) {
      const int k = rng.integer(1, 5);
      for (int j = 0; j <= k; ++j) {
        const double t = j == k ? hi : lo + width * j / k;
        raw.push_back({t, t});
      }
    } else {
      const int k = rng.integer(2, 5);
      const double q = rng.uniform(1.3, 3.0);
      const double denom = std::pow(q, k) - 1.0;
      for (int j = 0; j <= k; ++j) {
        const double t = j == k ? hi : lo + width * (std::pow(q, j) - 1.0) / denom;
        raw.push_back({t, t});
      }
    }
    cursor = hi;
  }
  return TimeScale::canonicalize(std::move(raw));
}

/// A generated instance plus what it is meant to exercise.
struct GeneratedInstance {
  Instance instance;
  /// The construction targets the equality case of the inequality.
  bool equality_case = false;
  std::string family;
};

namespace detail {

inline Expr shifted_x(double a) { return a == 0.0 ? Expr::var() : Expr::sub(Expr::var(), Expr::constant(a)); }

/// c0 + c1 (x-a) + c2 (x-a)^2 with c0 > 0 and c1, c2 >= 0.
inline ScaleFunction random_polynomial(TrialRng& rng, double a, double span) {
  const Expr t = shifted_x(a);
  const double c0 = rng.uniform(0.2, 2.0);
  const double c1 = rng.uniform(0.0, 2.0) / span;
  const double c2 = rng.uniform(0.0, 1.0) / (span * span);
  return ScaleFunction(Expr::add(Expr::add(Expr::constant(c0), Expr::mul(Expr::constant(c1), t)),
                                 Expr::mul(Expr::constant(c2), Expr::pow(t, Expr::constant(2.0)))));
}

/// w1 exp(k1 (x-a)) + w2 exp(-k2 (x-a)) with positive weights.
inline ScaleFunction random_exp_mix(TrialRng& rng, double a, double span) {
  const Expr t = shifted_x(a);
  const double w1 = rng.uniform(0.2, 1.5);
  const double w2 = rng.uniform(0.2, 1.5);
  const double k1 = rng.uniform(0.1, 1.5) / span;
  const double k2 = rng.uniform(0.1, 1.5) / span;
  return ScaleFunction(
      Expr::add(Expr::mul(Expr::constant(w1), Expr::call(Fn::kExp, Expr::mul(Expr::constant(k1), t))),
                Expr::mul(Expr::constant(w2),
                          Expr::call(Fn::kExp, Expr::mul(Expr::constant(-k2), t)))));
}

inline constexpr std::size_t kKnotsPerDenseSegment = 8;

/// Tabulation built by accumulating slope(t, step) over the knots of T
/// starting from f0: f(next) = f(t) + (next - t) * slope.
template <class Slope>
ScaleFunction cumulative(const TimeScale& T, double f0, Slope&& slope) {
  std::vector<double> knots = T.points_per_segment(kKnotsPerDenseSegment);
  std::vector<double> values(knots.size());
  values[0] = f0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    values[i] = values[i - 1] + (knots[i] - knots[i - 1]) * slope(knots[i - 1], knots[i]);
  }
  return ScaleFunction(Tabulation(T, std::move(knots), std::move(values)));
}

/// Positive random walk: values in roughly [0.2, 3].
inline ScaleFunction random_cumulative(TrialRng& rng, const TimeScale& T) {
  std::vector<double> knots = T.points_per_segment(kKnotsPerDenseSegment);
  std::vector<double> values(knots.size());
  double v = rng.uniform(0.5, 2.0);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    values[i] = v;
    v = std::clamp(v * std::exp(rng.uniform(-0.4, 0.4)), 0.2, 3.0);
  }
  return ScaleFunction(Tabulation(T, std::move(knots), std::move(values)));
}

inline FunctionFamily pick_family(const GenConfig& cfg, TrialRng& rng) {
  if (cfg.function_family) return *cfg.function_family;
  return static_cast<FunctionFamily>(rng.integer(0, 2));
}

inline ScaleFunction random_positive(FunctionFamily fam, TrialRng& rng, const TimeScale& T) {
  const double span = T.max() - T.min();
  switch (fam) {
    case FunctionFamily::kPolynomial: return random_polynomial(rng, T.min(), span);
    case FunctionFamily::kExpMix: return random_exp_mix(rng, T.min(), span);
    case FunctionFamily::kCumulative: return random_cumulative(rng, T);
  }
  return ScaleFunction::constant(1.0);
}

inline ScaleFunction scaled(const ScaleFunction& f, double c) {
  if (const Expr* e = f.expr()) return ScaleFunction(Expr::mul(Expr::constant(c), *e));
  const Tabulation& tab = *f.tabulation();
  std::vector<double> values = tab.values();
  for (double& v : values) v *= c;
  return ScaleFunction(Tabulation(tab.domain(), tab.knots(), std::move(values)));
}

/// g with g(t) = c f(t)^e (1 + eps(t)), tabulated on the knots of T.
inline ScaleFunction power_partner(TrialRng& rng, const ScaleFunction& f, const TimeScale& T,
                                   double c, double e, double eps) {
  std::vector<double> knots = T.points_per_segment(kKnotsPerDenseSegment);
  std::vector<double> values(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    values[i] = c * std::pow(f(knots[i]), e) * (1.0 + rng.uniform(-eps, eps));
  }
  return ScaleFunction(Tabulation(T, std::move(knots), std::move(values)));
}

inline double draw_p(const GenConfig& cfg, TrialRng& rng, bool allow_negative) {
  if (allow_negative && rng.chance(cfg.negative_p_fraction)) return -rng.uniform(0.25, 3.0);
  return rng.uniform(cfg.p_range.lo, cfg.p_range.hi);
}

}  // namespace detail

/// Builds an instance whose hypotheses hold by construction on [min T, max T].
/// Throws when the construction is infeasible on T.
inline GeneratedInstance gen_admissible(Theorem theorem, const TimeScale& T, const GenConfig& cfg,
                                        std::uint64_t index) {
  cfg.validate();
  TrialRng rng(cfg.seed, detail::kFunctionStream + static_cast<std::uint64_t>(theorem), index);
  GeneratedInstance out;
  Instance& in = out.instance;
  in.theorem = theorem;
  in.domain = CheckDomain{T, T.min(), T.max()};
  const double a = T.min();
  const double span = T.max() - T.min();
  if (!(span > 0.0)) throw Error(ErrorCode::kBadInterval, "scale needs at least two points");
  const FunctionFamily fam = detail::pick_family(cfg, rng);
  out.family = std::string(family_name(fam));

  switch (theorem) {
    case Theorem::kHolder: {
      in.p = detail::draw_p(cfg, rng, false);
      in.f = detail::random_positive(fam, rng, T);
      if (rng.chance(0.5)) {
        // g = c f^(p-1) makes |g|^q proportional to |f|^p: the equality
        // case. Tabulated partners with a small perturbation are near it.
        const double c = rng.uniform(0.3, 3.0);
        const Expr* e = in.f.expr();
        out.equality_case = e != nullptr && rng.chance(0.5);
        if (out.equality_case) {
          in.g = ScaleFunction(Expr::mul(Expr::constant(c), Expr::pow(*e, Expr::constant(in.p - 1.0))));
        } else {
          in.g = detail::power_partner(rng, in.f, T, c, in.p - 1.0, 1e-3);
        }
      } else {
        in.g = detail::random_positive(detail::pick_family(cfg, rng), rng, T);
      }
      break;
    }
    case Theorem::kRatioHolder: {
      in.p = detail::draw_p(cfg, rng, true);
      in.g = detail::random_positive(fam, rng, T);
      out.equality_case = rng.chance(1.0 / 3.0);
      in.f = out.equality_case ? detail::scaled(*in.g, rng.uniform(0.2, 5.0))
                               : detail::random_positive(detail::pick_family(cfg, rng), rng, T);
      break;
    }
    case Theorem::kBoundedRatio:
    case Theorem::kPowerBounded: {
      in.p = detail::draw_p(cfg, rng, false);
      in.f = detail::random_positive(fam, rng, T);
      in.g = detail::random_positive(detail::pick_family(cfg, rng), rng, T);
      break;
    }
    case Theorem::kPmBound: {
      in.p = detail::draw_p(cfg, rng, false);
      in.f = detail::random_positive(fam, rng, T);
      break;
    }
    case Theorem::kIntegralPower: {
      in.p = detail::draw_p(cfg, rng, true);
      const ScaleFunction base = detail::random_positive(fam, rng, T);
      const double integral = delta_integral(base, T, a, T.max(), 1e-12).value;
      const double target = std::pow(span, in.p - 1.0) * (1.0 + rng.uniform(0.0, 1.0));
      in.f = detail::scaled(base, target / integral);
      break;
    }
    case Theorem::kLiftedPower: {
      in.p = rng.uniform(std::max(1.0, cfg.p_range.lo - 0.1), cfg.p_range.hi);
      const double f0 = T.mu(a) + rng.uniform(0.0, 1.0);
      in.f = detail::cumulative(T, f0, [&](double t, double next) {
        const bool dense_step = T.sigma(t) == t;
        // sigma^Delta is 1 inside a dense segment and the forward quotient at
        // a right-scattered point.
        const double sd = dense_step ? 1.0 : (T.sigma(next) - next) / (next - t);
        return 1.0 + sd + rng.uniform(0.0, 1.0);
      });
      out.family = std::string(family_name(FunctionFamily::kCumulative));
      break;
    }
    case Theorem::kStrictPower: {
      in.p = detail::draw_p(cfg, rng, false);
      in.f = detail::cumulative(T, 0.0, [&](double, double) { return rng.uniform(0.05, 0.95); });
      out.family = std::string(family_name(FunctionFamily::kCumulative));
      break;
    }
  }
  if (theorem != Theorem::kIntegralPower && theorem != Theorem::kLiftedPower && theorem != Theorem::kStrictPower &&
      theorem != Theorem::kRatioHolder) {
    in.q = in.p / (in.p - 1.0);
  } else if (in.p > 1.0 || in.p < 0.0) {
    in.q = in.p / (in.p - 1.0);
  }
  if (theorem == Theorem::kLiftedPower) in.q.reset();
  return out;
}

struct TrialRecord {
  std::uint64_t trial = 0;
  GeneratedInstance generated;
  InequalityVerdict verdict;
  /// Verdict after the tighter-quadrature recheck, when one ran.
  std::optional<InequalityVerdict> recheck;
};

struct CampaignReport {
  std::string theorem;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t applicable = 0;
  std::size_t holds = 0;
  std::size_t hypothesis_failures = 0;
  /// Trials that threw while generating or checking.
  std::size_t errors = 0;
  /// Violations at the default tolerance that held after the recheck.
  std::size_t numerical_artifacts = 0;
  std::size_t equality_trials = 0;
  /// max |slack| / (1 + |lhs| + |rhs|) over equality-case trials.
  double equality_max_relative_slack = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  double min_relative_slack = std::numeric_limits<double>::infinity();
  std::optional<TrialRecord> min_slack_instance;
  std::vector<TrialRecord> violations;
  std::vector<std::pair<std::uint64_t, std::string>> error_messages;

  std::size_t violation_count() const { return violations.size(); }
};

namespace detail {

struct TrialOutcome {
  std::optional<TrialRecord> record;
  std::string error;
};

inline TrialOutcome run_trial(Theorem theorem, const GenConfig& cfg, std::uint64_t trial,
                              const CheckOptions& opts) {
  TrialOutcome out;
  try {
    TrialRecord rec;
    rec.trial = trial;
    const TimeScale T = gen_scale(cfg, trial);
    rec.generated = gen_admissible(theorem, T, cfg, trial);
    rec.verdict = check_instance(rec.generated.instance, opts);
    if (rec.verdict.violated()) {
      CheckOptions tight = opts;
      tight.quadrature_factor *= 0.1;
      rec.recheck = check_instance(rec.generated.instance, tight);
    }
    out.record = std::move(rec);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace detail

/// Runs `trials` independent generate-and-check rounds. Trial i draws its
/// randomness from (seed, i) only, so the report does not depend on the
/// thread count.
inline CampaignReport run_campaign(Theorem theorem, const GenConfig& cfg, std::size_t trials,
                                   const CheckOptions& opts = {}, unsigned threads = 0) {
  if (trials == 0) throw Error(ErrorCode::kBadArgument, "trials must be positive");
  cfg.validate();
  std::vector<detail::TrialOutcome> outcomes(trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < trials; i = next++) {
      outcomes[i] = detail::run_trial(theorem, cfg, i, opts);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  CampaignReport r;
  r.theorem = std::string(theorem_name(theorem));
  r.seed = cfg.seed;
  r.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    auto& o = outcomes[i];
    if (!o.record) {
      ++r.errors;
      if (r.error_messages.size() < 10) r.error_messages.emplace_back(i, o.error);
      continue;
    }
    TrialRecord& rec = *o.record;
    const InequalityVerdict& v = rec.verdict;
    if (!v.applicable) {
      ++r.hypothesis_failures;
      continue;
    }
    ++r.applicable;
    if (v.holds) {
      ++r.holds;
    } else if (rec.recheck && rec.recheck->holds) {
      ++r.holds;
      ++r.numerical_artifacts;
    }
    const double rel = v.relative_slack();
    if (rec.generated.equality_case) {
      ++r.equality_trials;
      r.equality_max_relative_slack = std::max(r.equality_max_relative_slack, std::abs(rel));
    }
    if (rel < r.min_relative_slack) {
      r.min_relative_slack = rel;
      r.min_slack = v.slack;
      r.min_slack_instance = rec;
    }
    if (!v.holds && !(rec.recheck && rec.recheck->holds)) r.violations.push_back(std::move(rec));
  }
  return r;
}

}  // namespace chronoscale
