#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chronoscale/calculus.hpp"
#include "chronoscale/error.hpp"
#include "chronoscale/format.hpp"
#include "chronoscale/scale_function.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

/// Conjugate exponents 1/p + 1/q = 1 in the Hoelder regime p > 1 or the
/// reverse regime p < 0.
struct ExponentPair {
  double p = 2.0;
  double q = 2.0;

  static ExponentPair from_p(double p) {
    if (!std::isfinite(p) || (p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kBadArgument, "exponent p must satisfy p > 1 or p < 0, got " +
                                               format_real(p));
    }
    return {p, p / (p - 1.0)};
  }

  static ExponentPair from_pq(double p, double q) {
    ExponentPair e = from_p(p);
    if (std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-12) {
      throw Error(ErrorCode::kBadArgument, "exponents are not conjugate: 1/p + 1/q != 1");
    }
    e.q = q;
    return e;
  }
};

/// Ratio bounds 0 < m <= M < infinity.
struct BoundsPair {
  double m = 1.0;
  double M = 1.0;

  static BoundsPair make(double m, double M) {
    if (!(m > 0.0) || !(m <= M) || !std::isfinite(M)) {
      throw Error(ErrorCode::kBadArgument, "bounds need 0 < m <= M < inf");
    }
    return {m, M};
  }
};

struct HypothesisReport {
  std::string name;
  bool satisfied = true;
  /// Signed; nonnegative means the clause holds.
  double margin = 0.0;
  std::optional<double> witness_point;
  /// Strict clauses need margin > hypothesis_tol instead of margin >= -hypothesis_tol.
  bool strict = false;
};

/// One intermediate inequality of a proof chain, evaluated on its own.
struct StepReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
};

enum class Theorem {
  kHolder,
  kRatioHolder,
  kBoundedRatio,
  kPowerBounded,
  kIntegralPower,
  kLiftedPower,
  kPmBound,
  kStrictPower,
};

inline constexpr Theorem kAllTheorems[] = {
    Theorem::kHolder,        Theorem::kRatioHolder, Theorem::kBoundedRatio, Theorem::kPowerBounded,
    Theorem::kIntegralPower, Theorem::kLiftedPower, Theorem::kPmBound,      Theorem::kStrictPower};

inline std::string_view theorem_name(Theorem t) {
  switch (t) {
    case Theorem::kHolder: return "holder";
    case Theorem::kRatioHolder: return "ratio_holder";
    case Theorem::kBoundedRatio: return "bounded_ratio";
    case Theorem::kPowerBounded: return "power_bounded";
    case Theorem::kIntegralPower: return "integral_power";
    case Theorem::kLiftedPower: return "lifted_power";
    case Theorem::kPmBound: return "pm_bound";
    case Theorem::kStrictPower: return "strict_power";
  }
  return "unknown";
}

inline Theorem theorem_from_name(std::string_view name) {
  for (Theorem t : kAllTheorems) {
    if (theorem_name(t) == name) return t;
  }
  throw Error(ErrorCode::kBadArgument, "unknown theorem '" + std::string(name) + "'");
}

/// Whether the theorem's inequality involves a second function g.
inline bool theorem_uses_g(Theorem t) {
  return t == Theorem::kHolder || t == Theorem::kRatioHolder || t == Theorem::kBoundedRatio ||
         t == Theorem::kPowerBounded;
}

struct InequalityVerdict {
  std::string theorem;
  std::vector<HypothesisReport> hypotheses;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  /// lhs - rhs, oriented so the inequality asserts slack >= 0 (> 0 if strict).
  double slack = std::numeric_limits<double>::quiet_NaN();
  bool applicable = false;
  /// Meaningful only when applicable.
  bool holds = false;
  bool strict_required = false;
  double tol = 0.0;
  std::vector<StepReport> steps;
  std::vector<std::pair<std::string, bool>> flags;
  std::string scale_digest;
  std::string function_text;
  std::string g_text;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> m;
  std::optional<double> M;
  std::string note;

  bool violated() const { return applicable && !holds; }

  /// Slack normalized by 1 + |lhs| + |rhs|.
  double relative_slack() const { return slack / (1.0 + std::abs(lhs) + std::abs(rhs)); }

  bool flag(std::string_view name) const {
    for (const auto& [n, v] : flags) {
      if (n == name) return v;
    }
    return false;
  }
};

struct CheckOptions {
  /// Verdict tolerance relative to 1 + |lhs| + |rhs|.
  double tol = 1e-9;
  /// Dense-segment spacing of the hypothesis grid; unset means 64 samples
  /// per dense segment.
  std::optional<double> grid_step;
  /// Absolute tolerance for hypothesis margins.
  double hypothesis_tol = 1e-7;
  double derivative_tol = kDefaultDerivativeTol;
  /// Quadrature tolerance as a fraction of tol.
  double quadrature_factor = 1e-2;

  double quadrature_tol() const { return tol * quadrature_factor; }
};

/// Scale and limits shared by every check; hypotheses and integrals are
/// evaluated on T restricted to [a, b].
struct CheckDomain {
  TimeScale scale = TimeScale::interval(0.0, 1.0);
  double a = 0.0;
  double b = 1.0;
};

inline constexpr std::string_view kSamplingNote =
    "hypotheses verified by sampling: every scattered point of [a,b] plus a grid on each dense "
    "segment (semi-decision)";

namespace detail {

struct Extremes {
  double min = std::numeric_limits<double>::infinity();
  double argmin = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  double argmax = 0.0;
};

inline double golden_section(const std::function<double(double)>& fn, double lo, double hi,
                             bool maximize) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double sign = maximize ? -1.0 : 1.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sign * fn(x1);
  double f2 = sign * fn(x2);
  for (int i = 0; i < 80 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sign * fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sign * fn(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

/// Extremes of fn over the grid, refined by golden-section search on dense
/// segments around the sampled extremes.
inline Extremes sampled_extremes(const std::function<double(double)>& fn, const TimeScale& R,
                                 const std::vector<double>& grid) {
  Extremes e;
  const auto consider = [&e](double x, double v) {
    if (v < e.min) {
      e.min = v;
      e.argmin = x;
    }
    if (v > e.max) {
      e.max = v;
      e.argmax = x;
    }
  };
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = fn(grid[i]);
    consider(grid[i], values[i]);
  }
  for (const auto& s : R.segments()) {
    if (s.is_point()) continue;
    const auto first = std::lower_bound(grid.begin(), grid.end(), s.lo) - grid.begin();
    const auto last = std::upper_bound(grid.begin(), grid.end(), s.hi) - grid.begin();
    if (last - first < 2) continue;
    std::size_t imin = first;
    std::size_t imax = first;
    for (auto i = static_cast<std::size_t>(first); i < static_cast<std::size_t>(last); ++i) {
      if (values[i] < values[imin]) imin = i;
      if (values[i] > values[imax]) imax = i;
    }
    for (const auto& [idx, maximize] : {std::pair{imin, false}, std::pair{imax, true}}) {
      const double lo = grid[idx > static_cast<std::size_t>(first) ? idx - 1 : idx];
      const double hi = grid[idx + 1 < static_cast<std::size_t>(last) ? idx + 1 : idx];
      if (hi > lo) {
        const double x = golden_section(fn, lo, hi, maximize);
        consider(x, fn(x));
      }
    }
  }
  return e;
}

class VerdictBuilder {
 public:
  VerdictBuilder(Theorem theorem, const CheckDomain& dom, const CheckOptions& opts)
      : opts_(opts), dom_(dom), restricted_(dom.scale.restrict(dom.a, dom.b)) {
    grid_ = restricted_.sample_grid(opts.grid_step);
    for (double x : grid_) {
      if (x > dom.a && x < dom.b) interior_.push_back(x);
    }
    v_.theorem = std::string(theorem_name(theorem));
    v_.tol = opts.tol;
    v_.scale_digest = scale_digest(dom.scale);
    v_.note = std::string(kSamplingNote);
  }

  const TimeScale& scale() const { return restricted_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& interior() const { return interior_; }
  double a() const { return dom_.a; }
  double b() const { return dom_.b; }
  InequalityVerdict& verdict() { return v_; }
  const CheckOptions& options() const { return opts_; }

  void hypothesis(std::string name, double margin, std::optional<double> witness = {},
                  bool strict = false) {
    HypothesisReport h;
    h.name = std::move(name);
    h.margin = margin;
    h.witness_point = witness;
    h.strict = strict;
    h.satisfied = strict ? margin > opts_.hypothesis_tol : margin >= -opts_.hypothesis_tol;
    v_.hypotheses.push_back(std::move(h));
  }

  /// Clause "p > 1" (or p >= 1 when not strict).
  void exponent_at_least_one(double p, bool strict) {
    hypothesis(strict ? "p > 1" : "p >= 1", p - 1.0, std::nullopt, strict);
  }

  /// Sampled lower bound of fn on the grid (or interior); evaluation failures
  /// count as a violated clause at the failing point.
  void sampled_min(std::string name, const std::function<double(double)>& fn, bool interior_only,
                   bool strict, double offset = 0.0) {
    const auto& pts = interior_only ? interior_ : grid_;
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> at;
    for (double x : pts) {
      double v = 0.0;
      try {
        v = fn(x) - offset;
      } catch (const Error&) {
        hypothesis(std::move(name), -1.0, x, strict);
        return;
      }
      if (v < best) {
        best = v;
        at = x;
      }
    }
    if (!at) best = 0.0;  // vacuous on an empty sample set
    hypothesis(std::move(name), best, at, strict);
  }

  void positive(const ScaleFunction& f, const std::string& label, bool strict) {
    sampled_min(label + " positive on [a,b]", [&f](double x) { return f(x); }, false, strict);
  }

  /// Collects f^Delta over the interior samples; a failing derivative is
  /// reported as the clause "<label> delta-differentiable on (a,b)".
  std::optional<std::vector<double>> interior_derivatives(const ScaleFunction& f,
                                                          const std::string& label) {
    std::vector<double> out;
    out.reserve(interior_.size());
    for (double x : interior_) {
      try {
        out.push_back(delta_derivative(f, restricted_, x, opts_.derivative_tol).value);
      } catch (const Error&) {
        hypothesis(label + " delta-differentiable on (a,b)", -1.0, x);
        return std::nullopt;
      }
    }
    hypothesis(label + " delta-differentiable on (a,b)", 0.0);
    return out;
  }

  /// Ratio clause m <= r(x) <= M. Bounds are estimated (and flagged) when not
  /// supplied: sampled extremes widened by 1e-9 relative.
  BoundsPair bounds_clause(const std::string& name, const std::function<double(double)>& ratio,
                           const std::optional<BoundsPair>& given) {
    Extremes ex;
    try {
      ex = sampled_extremes(ratio, restricted_, grid_);
    } catch (const Error&) {
      hypothesis(name, -1.0);
      return given.value_or(BoundsPair{});
    }
    BoundsPair bp;
    if (given) {
      bp = *given;
      v_.flags.emplace_back("bounds_estimated", false);
    } else {
      if (!(ex.min > 0.0) || !std::isfinite(ex.max)) {
        hypothesis(name, ex.min, ex.argmin);
        return BoundsPair{};
      }
      bp = BoundsPair{ex.min * (1.0 - 1e-9), ex.max * (1.0 + 1e-9)};
      v_.flags.emplace_back("bounds_estimated", true);
    }
    v_.m = bp.m;
    v_.M = bp.M;
    const double low = ex.min - bp.m;
    const double high = bp.M - ex.max;
    hypothesis(name, std::min(low, high), low <= high ? ex.argmin : ex.argmax);
    return bp;
  }

  double integral(const ScaleFunction& f) const {
    return delta_integral(f, restricted_, dom_.a, dom_.b, opts_.quadrature_tol()).value;
  }

  bool gate_open() const {
    return std::all_of(v_.hypotheses.begin(), v_.hypotheses.end(),
                       [](const HypothesisReport& h) { return h.satisfied; });
  }

  bool holds(double lhs, double rhs, bool strict) const {
    const double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
    const double slack = lhs - rhs;
    return strict ? slack > opts_.tol * scale : slack >= -opts_.tol * scale;
  }

  void step(std::string name, double lhs, double rhs) {
    v_.steps.push_back({std::move(name), lhs, rhs, lhs - rhs, holds(lhs, rhs, false)});
  }

  bool near_equality() const {
    return std::abs(v_.slack) <= opts_.tol * (1.0 + std::abs(v_.lhs) + std::abs(v_.rhs));
  }

  /// Evaluates both sides. With the gate closed, evaluation errors leave the
  /// sides as NaN; with the gate open they propagate.
  template <class Sides>
  InequalityVerdict finish(Sides&& sides, bool strict) {
    v_.strict_required = strict;
    v_.applicable = gate_open();
    try {
      const auto [lhs, rhs] = sides();
      v_.lhs = lhs;
      v_.rhs = rhs;
      v_.slack = lhs - rhs;
    } catch (const Error&) {
      if (v_.applicable) throw;
    }
    v_.holds = v_.applicable && holds(v_.lhs, v_.rhs, strict);
    return v_;
  }

 private:
  CheckOptions opts_;
  CheckDomain dom_;
  TimeScale restricted_;
  std::vector<double> grid_;
  std::vector<double> interior_;
  InequalityVerdict v_;
};

inline ScaleFunction power_of(const ScaleFunction& f, double e, bool absolute = false) {
  return transform(
      f, [e, absolute](double v) { return checked_pow(absolute ? std::abs(v) : v, e); },
      (absolute ? "|" + f.text() + "|^" : "(" + f.text() + ")^") + format_real(e));
}

inline void describe(InequalityVerdict& v, const ScaleFunction& f, const ScaleFunction* g,
                     std::optional<double> p, std::optional<double> q) {
  v.function_text = f.text();
  if (g) v.g_text = g->text();
  v.p = p;
  v.q = q;
}

inline void flag_ratio_proportional(VerdictBuilder& vb, const std::function<double(double)>& r,
                                    std::string name) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : vb.grid()) {
    const double v = r(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  vb.verdict().flags.emplace_back(std::move(name), lo > 0.0 && hi / lo - 1.0 <= 1e-6);
}

}  // namespace detail

/// [int |f|^p]^{1/p} [int |g|^q]^{1/q} >= int |f g|, p > 1.
inline InequalityVerdict check_holder(const CheckDomain& dom, const ScaleFunction& f,
                                      const ScaleFunction& g, ExponentPair pq,
                                      const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kHolder, dom, opts);
  detail::describe(vb.verdict(), f, &g, pq.p, pq.q);
  vb.exponent_at_least_one(pq.p, true);
  vb.sampled_min("f evaluable on [a,b]", [&f](double x) { return (void)f(x), 0.0; }, false, false);
  vb.sampled_min("g evaluable on [a,b]", [&g](double x) { return (void)g(x), 0.0; }, false, false);
  auto v = vb.finish(
      [&] {
        const double fp = vb.integral(detail::power_of(f, pq.p, true));
        const double gq = vb.integral(detail::power_of(g, pq.q, true));
        const double fg = vb.integral(
            combine(f, g, [](double x, double y) { return std::abs(x * y); }, "|f g|"));
        return std::pair{std::pow(fp, 1.0 / pq.p) * std::pow(gq, 1.0 / pq.q), fg};
      },
      false);
  if (v.applicable) {
    vb.verdict() = v;
    vb.verdict().flags.emplace_back("near_equality", vb.near_equality());
    if (vb.near_equality()) {
      detail::flag_ratio_proportional(
          vb,
          [&](double x) {
            const double gv = std::pow(std::abs(g(x)), pq.q);
            return gv == 0.0 ? 0.0 : std::pow(std::abs(f(x)), pq.p) / gv;
          },
          "proportional");
    }
    return vb.verdict();
  }
  return v;
}

/// int f^p / g^{p/q} >= [int f]^p / [int g]^{p/q} for positive f, g and
/// p > 1 or p < 0; equality exactly when f = a g.
inline InequalityVerdict check_ratio_holder(const CheckDomain& dom, const ScaleFunction& f,
                                            const ScaleFunction& g, ExponentPair pq,
                                            const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kRatioHolder, dom, opts);
  detail::describe(vb.verdict(), f, &g, pq.p, pq.q);
  vb.hypothesis("p > 1 or p < 0", pq.p > 1.0 ? pq.p - 1.0 : -pq.p, std::nullopt, true);
  vb.positive(f, "f", true);
  vb.positive(g, "g", true);
  const double r = pq.p / pq.q;
  auto v = vb.finish(
      [&] {
        const auto integrand = combine(
            f, g, [&](double x, double y) { return checked_pow(x, pq.p) / checked_pow(y, r); },
            "f^p/g^(p/q)");
        const double lhs = vb.integral(integrand);
        const double rhs = checked_pow(vb.integral(f), pq.p) / checked_pow(vb.integral(g), r);
        return std::pair{lhs, rhs};
      },
      false);
  if (!v.applicable) return v;
  vb.verdict() = v;
  vb.verdict().flags.emplace_back("near_equality", vb.near_equality());
  if (vb.near_equality()) {
    detail::flag_ratio_proportional(vb, [&](double x) { return f(x) / g(x); }, "proportional");
  }
  return vb.verdict();
}

/// (M/m)^{1/(pq)} int f^{1/p} g^{1/q} >= [int f]^{1/p} [int g]^{1/q}
/// when 0 < m <= f/g <= M.
inline InequalityVerdict check_bounded_ratio(const CheckDomain& dom, const ScaleFunction& f,
                                             const ScaleFunction& g, ExponentPair pq,
                                             std::optional<BoundsPair> bounds = {},
                                             const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kBoundedRatio, dom, opts);
  detail::describe(vb.verdict(), f, &g, pq.p, pq.q);
  vb.exponent_at_least_one(pq.p, true);
  vb.positive(f, "f", true);
  vb.positive(g, "g", true);
  const BoundsPair bp =
      vb.bounds_clause("m <= f/g <= M", [&](double x) { return f(x) / g(x); }, bounds);
  return vb.finish(
      [&] {
        const auto integrand = combine(
            f, g,
            [&](double x, double y) {
              return checked_pow(x, 1.0 / pq.p) * checked_pow(y, 1.0 / pq.q);
            },
            "f^(1/p) g^(1/q)");
        const double lhs = std::pow(bp.M / bp.m, 1.0 / (pq.p * pq.q)) * vb.integral(integrand);
        const double rhs = checked_pow(vb.integral(f), 1.0 / pq.p) *
                           checked_pow(vb.integral(g), 1.0 / pq.q);
        return std::pair{lhs, rhs};
      },
      false);
}

/// (M/m)^{1/(pq)} int f g >= [int f^p]^{1/p} [int g^q]^{1/q}
/// when 0 < m <= f^p/g^q <= M.
inline InequalityVerdict check_power_bounded(const CheckDomain& dom, const ScaleFunction& f,
                                             const ScaleFunction& g, ExponentPair pq,
                                             std::optional<BoundsPair> bounds = {},
                                             const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kPowerBounded, dom, opts);
  detail::describe(vb.verdict(), f, &g, pq.p, pq.q);
  vb.exponent_at_least_one(pq.p, true);
  vb.positive(f, "f", true);
  vb.positive(g, "g", true);
  const BoundsPair bp = vb.bounds_clause(
      "m <= f^p/g^q <= M",
      [&](double x) { return checked_pow(f(x), pq.p) / checked_pow(g(x), pq.q); }, bounds);
  return vb.finish(
      [&] {
        const double fg =
            vb.integral(combine(f, g, [](double x, double y) { return x * y; }, "f g"));
        const double lhs = std::pow(bp.M / bp.m, 1.0 / (pq.p * pq.q)) * fg;
        const double rhs = std::pow(vb.integral(detail::power_of(f, pq.p)), 1.0 / pq.p) *
                           std::pow(vb.integral(detail::power_of(g, pq.q)), 1.0 / pq.q);
        return std::pair{lhs, rhs};
      },
      false);
}

/// int f^p >= [int f]^{p-1} for positive f with int f >= (b-a)^{p-1},
/// p > 1 or p < 0.
inline InequalityVerdict check_integral_power(const CheckDomain& dom, const ScaleFunction& f, double p,
                                  const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kIntegralPower, dom, opts);
  const bool regime_ok = p > 1.0 || p < 0.0;
  detail::describe(vb.verdict(), f, nullptr, p,
                   regime_ok ? std::optional<double>(p / (p - 1.0)) : std::nullopt);
  vb.hypothesis("p > 1 or p < 0", p > 1.0 ? p - 1.0 : -p, std::nullopt, true);
  vb.positive(f, "f", true);
  const double span = dom.b - dom.a;
  if (vb.gate_open()) {
    const double integral = vb.integral(f);
    vb.hypothesis("int f >= (b-a)^(p-1)", integral - std::pow(span, p - 1.0));
  }
  return vb.finish(
      [&] {
        const double lhs = vb.integral(detail::power_of(f, p));
        const double rhs = checked_pow(vb.integral(f), p - 1.0);
        return std::pair{lhs, rhs};
      },
      false);
}

/// int f^{p+2} >= [int f]^{p+1} / (b-a)^{p-1} for p >= 1 when f(a) >= mu(a)
/// and f^Delta >= 1 + sigma^Delta on (a,b).
inline InequalityVerdict check_lifted_power(const CheckDomain& dom, const ScaleFunction& f,
                                           double p, const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kLiftedPower, dom, opts);
  detail::describe(vb.verdict(), f, nullptr, p, std::nullopt);
  const TimeScale& R = vb.scale();
  vb.exponent_at_least_one(p, false);
  vb.positive(f, "f", false);
  vb.sampled_min("sigma positive on [a,b]", [&R](double x) { return R.sigma(x); }, false, false);
  try {
    vb.hypothesis("f(a) >= mu(a)", f(dom.a) - R.mu(dom.a), dom.a);
  } catch (const Error&) {
    vb.hypothesis("f(a) >= mu(a)", -1.0, dom.a);
  }
  vb.hypothesis("mu(a) >= 0", R.mu(dom.a), dom.a);

  std::vector<double> sigma_d;
  std::optional<double> sigma_fail;
  for (double x : vb.interior()) {
    try {
      sigma_d.push_back(sigma_delta(R, x, opts.derivative_tol).value);
    } catch (const Error&) {
      sigma_fail = x;
      break;
    }
  }
  vb.hypothesis("sigma delta-differentiable on (a,b)", sigma_fail ? -1.0 : 0.0, sigma_fail);
  const auto fd = vb.interior_derivatives(f, "f");
  if (fd && !sigma_fail) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> at;
    for (std::size_t i = 0; i < fd->size(); ++i) {
      const double m = (*fd)[i] - 1.0 - sigma_d[i];
      if (m < best) {
        best = m;
        at = vb.interior()[i];
      }
    }
    vb.hypothesis("f^Delta >= 1 + sigma^Delta on (a,b)", at ? best : 0.0, at);
  }
  const double span = dom.b - dom.a;
  return vb.finish(
      [&] {
        const double lhs = vb.integral(detail::power_of(f, p + 2.0));
        const double rhs = checked_pow(vb.integral(f), p + 1.0) / std::pow(span, p - 1.0);
        return std::pair{lhs, rhs};
      },
      false);
}

/// [int f^p]^{1/p} <= (b-a)^{-(p+1)/q} (M/m)^{2/(pq)} [int f^{1/p}]^p when
/// 0 < m <= f^p <= M. The two intermediate bounds of the argument are
/// reported as steps.
inline InequalityVerdict check_pm_bound(const CheckDomain& dom, const ScaleFunction& f,
                                        ExponentPair pq, std::optional<BoundsPair> bounds = {},
                                        const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kPmBound, dom, opts);
  detail::describe(vb.verdict(), f, nullptr, pq.p, pq.q);
  vb.exponent_at_least_one(pq.p, true);
  vb.positive(f, "f", true);
  const BoundsPair bp = vb.bounds_clause(
      "m <= f^p <= M", [&](double x) { return checked_pow(f(x), pq.p); }, bounds);
  const double p = pq.p;
  const double q = pq.q;
  const double span = dom.b - dom.a;
  const double ratio = bp.M / bp.m;
  auto v = vb.finish(
      [&] {
        const double int_fp = vb.integral(detail::power_of(f, p));
        const double int_root = vb.integral(detail::power_of(f, 1.0 / p));
        const double int_f = vb.integral(f);
        const double rhs = std::pow(int_fp, 1.0 / p);
        const double lhs = std::pow(span, -(p + 1.0) / q) * std::pow(ratio, 2.0 / (p * q)) *
                           std::pow(int_root, p);
        vb.step("power step: (M/m)^(1/pq) (b-a)^(-1/q) int f >= [int f^p]^(1/p)",
                std::pow(ratio, 1.0 / (p * q)) * std::pow(span, -1.0 / q) * int_f, rhs);
        vb.step("mean step: (b-a)^(-p/q) (M/m)^(1/pq) [int f^(1/p)]^p >= int f",
                std::pow(span, -p / q) * std::pow(ratio, 1.0 / (p * q)) * std::pow(int_root, p),
                int_f);
        return std::pair{lhs, rhs};
      },
      false);
  v.steps = vb.verdict().steps;
  return v;
}

/// [int f]^p > 2^{1-p} p int f^{2p-1} for p > 1 when f(a) = 0 and
/// 0 < f^Delta < 1 on (a,b).
inline InequalityVerdict check_strict_power(const CheckDomain& dom, const ScaleFunction& f,
                                             double p, const CheckOptions& opts = {}) {
  detail::VerdictBuilder vb(Theorem::kStrictPower, dom, opts);
  detail::describe(vb.verdict(), f, nullptr, p, p > 1.0 ? std::optional(p / (p - 1.0)) : std::nullopt);
  vb.exponent_at_least_one(p, true);
  try {
    vb.hypothesis("f(a) = 0", -std::abs(f(dom.a)), dom.a);
  } catch (const Error&) {
    vb.hypothesis("f(a) = 0", -1.0, dom.a);
  }
  const auto fd = vb.interior_derivatives(f, "f");
  if (fd) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> at;
    for (std::size_t i = 0; i < fd->size(); ++i) {
      const double m = std::min((*fd)[i], 1.0 - (*fd)[i]);
      if (m < best) {
        best = m;
        at = vb.interior()[i];
      }
    }
    // An empty interior makes the clause vacuous.
    vb.hypothesis("0 < f^Delta < 1 on (a,b)", at ? best : 1.0, at, true);
  }
  return vb.finish(
      [&] {
        const double lhs = checked_pow(vb.integral(f), p);
        const double rhs =
            std::pow(2.0, 1.0 - p) * p * vb.integral(detail::power_of(f, 2.0 * p - 1.0));
        return std::pair{lhs, rhs};
      },
      true);
}

/// Named diagnostic checks exposing the monotonicity argument behind a
/// theorem.
struct WitnessReport {
  std::string name;
  std::vector<HypothesisReport> checks;
  bool all_pass = true;

  const HypothesisReport* find(std::string_view check) const {
    for (const auto& c : checks) {
      if (c.name == check) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline void witness_check(WitnessReport& w, std::string name, double margin,
                          std::optional<double> at, bool strict, double tol) {
  HypothesisReport h;
  h.name = std::move(name);
  h.margin = margin;
  h.witness_point = at;
  h.strict = strict;
  // Strict witness values vanish at a, so any tolerance band would reject
  // valid samples close to a.
  h.satisfied = strict ? margin > 0.0 : margin >= -tol;
  w.all_pass = w.all_pass && h.satisfied;
  w.checks.push_back(std::move(h));
}

}  // namespace detail

/// F(x) = int_a^x f - (x-a)^2 with F^Delta(x) = f(x) - (x-a) - (sigma(x)-a).
/// Reports F(a) = 0, F^Delta(a) = f(a) - mu(a) >= 0, sampled F^{Delta Delta}
/// >= 0 on [a,b), F nondecreasing, and F(b) >= 0.
inline WitnessReport lifted_power_witness(const CheckDomain& dom, const ScaleFunction& f, double p,
                                      const CheckOptions& opts = {}) {
  (void)p;  // the witness does not depend on the exponent
  const TimeScale R = dom.scale.restrict(dom.a, dom.b);
  const double a = dom.a;
  const double qtol = opts.quadrature_tol();
  WitnessReport w;
  w.name = "lifted_power_witness";
  const double tol = opts.hypothesis_tol;

  std::vector<double> bp(f.breakpoints().begin(), f.breakpoints().end());
  const ScaleFunction F = ScaleFunction::from_callable(
      [f, R, a, qtol](double x) {
        return delta_integral(f, R, a, x, qtol).value - (x - a) * (x - a);
      },
      "F", bp);
  for (const auto& s : R.segments()) bp.push_back(s.hi);
  const ScaleFunction Fd = ScaleFunction::from_callable(
      [f, R, a](double x) { return f(x) - (x - a) - (R.sigma(x) - a); }, "F^Delta", bp);

  detail::witness_check(w, "F(a) = 0", -std::abs(F(a)), a, false, tol);
  detail::witness_check(w, "F^Delta(a) = f(a) - mu(a) >= 0", f(a) - R.mu(a), a, false, tol);

  const std::vector<double> grid = R.sample_grid(opts.grid_step);
  double best = std::numeric_limits<double>::infinity();
  std::optional<double> at;
  bool failed = false;
  for (double x : grid) {
    if (x >= dom.b) break;
    try {
      const double v = delta_derivative(Fd, R, x, opts.derivative_tol * 100.0).value;
      if (v < best) {
        best = v;
        at = x;
      }
    } catch (const Error&) {
      failed = true;
      at = x;
      break;
    }
  }
  detail::witness_check(w, "F^DeltaDelta >= 0 on [a,b)", failed ? -1.0 : (at ? best : 0.0), at,
                        false, tol);

  const double step = opts.grid_step.value_or(
      std::max((dom.b - dom.a) / 64.0, std::numeric_limits<double>::min()));
  const MonotonicityReport mono = verify_nondecreasing(F, R, dom.a, dom.b, step, tol, Fd);
  detail::witness_check(w, "F nondecreasing on [a,b]",
                        std::min(mono.min_derivative, mono.min_increment),
                        mono.min_derivative < mono.min_increment ? mono.min_derivative_at
                                                                 : mono.min_increment_at,
                        false, tol);
  detail::witness_check(w, "F(b) >= 0", F(dom.b), dom.b, false, tol);
  return w;
}

/// G(x) = int_a^x f - f(x)^2 / 2 with
/// G^Delta = f - (f + f^sigma) f^Delta / 2. Reports G(a) = 0, G^Delta > 0 on
/// (a,b) and G > 0 on (a,b].
inline WitnessReport strict_power_witness(const CheckDomain& dom, const ScaleFunction& f,
                                    const CheckOptions& opts = {}) {
  const TimeScale R = dom.scale.restrict(dom.a, dom.b);
  const double a = dom.a;
  const double qtol = opts.quadrature_tol();
  const double tol = opts.hypothesis_tol;
  WitnessReport w;
  w.name = "strict_power_witness";
  const auto G = [&](double x) {
    const double fx = f(x);
    return delta_integral(f, R, a, x, qtol).value - 0.5 * fx * fx;
  };
  const ScaleFunction fs = compose_sigma(f, R);
  detail::witness_check(w, "G(a) = 0", -std::abs(G(a)), a, false, tol);

  const std::vector<double> grid = R.sample_grid(opts.grid_step);
  double best_d = std::numeric_limits<double>::infinity();
  std::optional<double> at_d;
  double best_g = std::numeric_limits<double>::infinity();
  std::optional<double> at_g;
  for (double x : grid) {
    if (x <= a) continue;
    if (x < dom.b) {
      double gd = -1.0;
      try {
        const double fd = delta_derivative(f, R, x, opts.derivative_tol).value;
        gd = f(x) - 0.5 * (f(x) + fs(x)) * fd;
      } catch (const Error&) {
      }
      if (gd < best_d) {
        best_d = gd;
        at_d = x;
      }
    }
    const double gx = G(x);
    if (gx < best_g) {
      best_g = gx;
      at_g = x;
    }
  }
  detail::witness_check(w, "G^Delta > 0 on (a,b)", at_d ? best_d : 1.0, at_d, true, tol);
  detail::witness_check(w, "G > 0 on (a,b]", at_g ? best_g : 1.0, at_g, true, tol);
  return w;
}

/// One self-contained inequality instance.
struct Instance {
  Theorem theorem = Theorem::kIntegralPower;
  CheckDomain domain;
  ScaleFunction f = ScaleFunction::constant(1.0);
  std::optional<ScaleFunction> g;
  double p = 2.0;
  std::optional<double> q;
  std::optional<BoundsPair> bounds;
};

inline InequalityVerdict check_instance(const Instance& in, const CheckOptions& opts = {}) {
  const auto pair = [&] { return in.q ? ExponentPair::from_pq(in.p, *in.q) : ExponentPair::from_p(in.p); };
  const auto need_g = [&]() -> const ScaleFunction& {
    if (!in.g) throw Error(ErrorCode::kBadArgument, "this check needs a second function g");
    return *in.g;
  };
  switch (in.theorem) {
    case Theorem::kHolder: return check_holder(in.domain, in.f, need_g(), pair(), opts);
    case Theorem::kRatioHolder: return check_ratio_holder(in.domain, in.f, need_g(), pair(), opts);
    case Theorem::kBoundedRatio:
      return check_bounded_ratio(in.domain, in.f, need_g(), pair(), in.bounds, opts);
    case Theorem::kPowerBounded:
      return check_power_bounded(in.domain, in.f, need_g(), pair(), in.bounds, opts);
    case Theorem::kIntegralPower: return check_integral_power(in.domain, in.f, in.p, opts);
    case Theorem::kLiftedPower: return check_lifted_power(in.domain, in.f, in.p, opts);
    case Theorem::kPmBound: return check_pm_bound(in.domain, in.f, pair(), in.bounds, opts);
    case Theorem::kStrictPower: return check_strict_power(in.domain, in.f, in.p, opts);
  }
  throw Error(ErrorCode::kBadArgument, "unknown theorem");
}

}  // namespace chronoscale
