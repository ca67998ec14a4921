#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chronoscale/calculus.hpp"
#include "chronoscale/error.hpp"
#include "chronoscale/expr.hpp"
#include "chronoscale/scale_function.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

struct IdentitySweepOptions {
  double integral_tol = kDefaultIntegralTol;
  double derivative_tol = kDefaultDerivativeTol;
  /// Residuals pass when residual <= factor * tol * (1 + scale).
  double factor = 10.0;
  /// Sample points per dense segment for the pointwise identities.
  std::size_t per_segment = 8;
};

struct IdentitySweep {
  IdentitySweep(std::string name_, double tol_) : name(std::move(name_)), tol(tol_) {}

  std::string name;
  double tol = 0.0;
  std::size_t evaluations = 0;
  /// Largest residual / (tol * (1 + scale)) seen.
  double max_ratio = 0.0;
  IdentityResidual worst;
  std::optional<double> worst_at;
  bool pass = true;
  /// Set when the identity could not be exercised on this input.
  std::string skipped;

  void record(const IdentityResidual& r, double at) {
    ++evaluations;
    const double ratio = r.ratio(tol);
    if (evaluations == 1 || ratio > max_ratio) {
      max_ratio = ratio;
      worst = r;
      worst_at = at;
    }
  }
};

/// Evaluates FTC, integration by parts, product and quotient rules, the
/// chain rule (outer f, inner g) and substitution (v = g, omega = f) on T.
/// The chain rule needs f as an expression; substitution needs g strictly
/// increasing; the quotient rule skips points where g g^sigma vanishes.
inline std::vector<IdentitySweep> identity_sweep(const ScaleFunction& f, const ScaleFunction& g,
                                                 const TimeScale& T,
                                                 const IdentitySweepOptions& opts = {}) {
  const double lo = T.min();
  const double hi = T.max();
  std::vector<double> pts;
  for (double t : T.points_per_segment(opts.per_segment)) {
    if (t < hi) pts.push_back(t);
  }
  std::vector<std::pair<double, double>> pairs{{lo, hi}};
  if (pts.size() > 2) {
    const double mid = pts[pts.size() / 2];
    pairs.emplace_back(lo, mid);
    pairs.emplace_back(mid, hi);
  }

  IdentitySweep ftc{"ftc", opts.integral_tol};
  IdentitySweep parts{"parts", opts.integral_tol};
  for (const auto& [b, c] : pairs) {
    ftc.record(fundamental_theorem_check(f, T, b, c, opts.integral_tol), c);
    parts.record(parts_check(f, g, T, b, c, opts.integral_tol), c);
  }

  IdentitySweep product{"product", opts.derivative_tol};
  IdentitySweep quotient{"quotient", opts.derivative_tol};
  for (double t : pts) {
    try {
      const auto r = product_quotient_check(f, g, T, t, opts.derivative_tol);
      product.record(r.product, t);
      quotient.record(r.quotient, t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kQuotientUndefined) throw;
      // The product rule does not need the quotient; evaluate it alone.
      const auto times = [](double x, double y) { return x * y; };
      const ScaleFunction fg = combine(f, g, times, "f*g");
      const double lhs = delta_derivative(fg, T, t, opts.derivative_tol).value;
      const double fd = delta_derivative(f, T, t, opts.derivative_tol).value;
      const double gd = delta_derivative(g, T, t, opts.derivative_tol).value;
      const double rhs = fd * g(t) + f(T.sigma(t)) * gd;
      product.record({std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))}, t);
    }
  }
  if (quotient.evaluations == 0) quotient.skipped = "g g^sigma vanishes at every sample";

  IdentitySweep chain{"chain_rule", opts.derivative_tol};
  if (const Expr* e = f.expr()) {
    std::optional<ScaleFunction> fprime;
    try {
      fprime = ScaleFunction(diff(*e));
    } catch (const Error& err) {
      chain.skipped = err.what();
    }
    if (fprime) {
      const ScaleFunction composed = ScaleFunction::from_callable(
          [f, g](double s) { return f(g(s)); }, "f(g)",
          std::vector<double>(g.breakpoints().begin(), g.breakpoints().end()));
      for (double t : pts) {
        const double lhs = delta_derivative(composed, T, t, opts.derivative_tol).value;
        const double rhs = chain_rule_derivative(*fprime, g, T, t, opts.derivative_tol).value;
        chain.record({std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))}, t);
      }
    }
  } else {
    chain.skipped = "outer function is not an expression";
  }

  IdentitySweep subst{"substitution", opts.derivative_tol};
  try {
    (void)image_scale(g, T);
    for (double t : pts) subst.record(substitution_check(g, f, T, t, opts.derivative_tol), t);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBadSubstitution) throw;
    subst.skipped = e.what();
  }

  std::vector<IdentitySweep> out{ftc, parts, product, quotient, chain, subst};
  for (auto& s : out) s.pass = s.max_ratio <= opts.factor;
  return out;
}

}  // namespace chronoscale
