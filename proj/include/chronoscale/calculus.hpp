#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chronoscale/error.hpp"
#include "chronoscale/format.hpp"
#include "chronoscale/quadrature.hpp"
#include "chronoscale/scale_function.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

enum class DerivativeMethod { kExactScattered, kNumericDense };

struct DeltaResult {
  double value = 0.0;
  DerivativeMethod method = DerivativeMethod::kExactScattered;
  double err_estimate = 0.0;
};

struct IntegralResult {
  double value = 0.0;
  double discrete_part = 0.0;
  double continuous_part = 0.0;
  /// Bounds the quadrature error of the continuous part only.
  double err_estimate = 0.0;
};

inline constexpr double kDefaultDerivativeTol = 1e-8;
inline constexpr double kDefaultIntegralTol = 1e-9;
inline constexpr double kDefaultStepScale = 1e-3;

/// f o sigma on T.
inline ScaleFunction compose_sigma(const ScaleFunction& f, const TimeScale& T) {
  std::vector<double> bp(f.breakpoints().begin(), f.breakpoints().end());
  for (const auto& s : T.segments()) bp.push_back(s.hi);
  return ScaleFunction::from_callable([f, T](double t) { return f(T.sigma(t)); },
                                      "(" + f.text() + ")^sigma", std::move(bp));
}

/// The forward jump operator of T as a function.
inline ScaleFunction sigma_function(const TimeScale& T) {
  std::vector<double> bp;
  for (const auto& s : T.segments()) bp.push_back(s.hi);
  return ScaleFunction::from_callable([T](double t) { return T.sigma(t); }, "sigma",
                                      std::move(bp));
}

/// Delta derivative of f at t.
///
/// Right-scattered t: the exact quotient (f(sigma(t)) - f(t)) / mu(t).
/// Right-dense t: a one-sided difference quotient taken from inside the
/// containing dense segment, Richardson-extrapolated over four to eight
/// halvings of the step. The step starts at min(reach / 2, step_scale * (1 + |t|)), where
/// reach is the distance to the segment end or to the nearest breakpoint of
/// f on that side. The forward side is used at breakpoints and left-scattered
/// points, the backward side at a left-dense maximum, and otherwise whichever
/// side has more room. Raises NoConvergence when the extrapolation residual
/// exceeds tol * (1 + |value|).
inline DeltaResult delta_derivative(const ScaleFunction& f, const TimeScale& T, double t,
                                    double tol = kDefaultDerivativeTol,
                                    double step_scale = kDefaultStepScale) {
  const PointClass pc = T.classify(t);
  if (T.is_left_scattered_max(t)) {
    throw Error(ErrorCode::kOutsideKappaDomain,
                format_real(t) + " is a left-scattered maximum; the delta derivative is undefined");
  }
  if (!pc.is_max && pc.right_scattered()) {
    const double st = T.sigma(t);
    return {(f(st) - f(t)) / (st - t), DerivativeMethod::kExactScattered, 0.0};
  }

  const Segment& seg = T.segment_of(t);
  double forward_reach = seg.hi - t;
  double backward_reach = t - seg.lo;
  if (auto nb = f.next_breakpoint_after(t)) forward_reach = std::min(forward_reach, *nb - t);
  if (auto pb = f.prev_breakpoint_before(t)) backward_reach = std::min(backward_reach, t - *pb);

  bool forward = true;
  if (pc.is_max) {
    forward = false;
  } else if (t == seg.lo || f.has_breakpoint(t)) {
    forward = true;
  } else {
    forward = forward_reach >= backward_reach;
  }
  const double reach = forward ? forward_reach : backward_reach;
  if (!(reach > 0.0)) {
    throw Error(ErrorCode::kNoConvergence, "no room for a difference quotient at " + format_real(t));
  }

  const double h0 = std::min(0.5 * reach, step_scale * (1.0 + std::abs(t)));
  const double ft = f(t);
  // Halve the step until the diagonal estimates settle or start to drift
  // apart again (roundoff taking over); keep the best pair seen.
  constexpr int kMinLevels = 4;
  constexpr int kMaxLevels = 8;
  double table[kMaxLevels][kMaxLevels];
  double h = h0;
  double value = 0.0;
  double err = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kMaxLevels; ++i, h *= 0.5) {
    table[i][0] = forward ? (f(t + h) - ft) / h : (ft - f(t - h)) / h;
    double factor = 1.0;
    for (int j = 1; j <= i; ++j) {
      factor *= 2.0;
      table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
    }
    if (i == 0) continue;
    const double e = std::abs(table[i][i] - table[i - 1][i - 1]);
    if (e <= err) {
      err = e;
      value = table[i][i];
    } else if (i >= kMinLevels && e > 2.0 * err) {
      break;
    }
    if (i + 1 >= kMinLevels && err <= 1e-2 * tol * (1.0 + std::abs(value))) break;
  }
  if (!std::isfinite(value) || err > tol * (1.0 + std::abs(value))) {
    throw Error(ErrorCode::kNoConvergence,
                "difference quotients at " + format_real(t) + " do not settle (residual " +
                    format_real(err) + ")");
  }
  return {value, DerivativeMethod::kNumericDense, err};
}

/// The map s -> f^Delta(s) on T.
inline ScaleFunction delta_derivative_function(const ScaleFunction& f, const TimeScale& T,
                                               double tol = kDefaultDerivativeTol) {
  return ScaleFunction::from_callable(
      [f, T, tol](double s) { return delta_derivative(f, T, s, tol).value; },
      "(" + f.text() + ")^Delta",
      std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()));
}

/// f^{Delta Delta}(t). The outer quotient starts from a 10x larger step so
/// that the inner derivative noise does not dominate.
inline DeltaResult second_delta_derivative(const ScaleFunction& f, const TimeScale& T, double t,
                                           double tol = 1e-6) {
  const ScaleFunction inner = delta_derivative_function(f, T, std::min(tol, kDefaultDerivativeTol));
  return delta_derivative(inner, T, t, tol, 10.0 * kDefaultStepScale);
}

/// sigma^Delta(t).
inline DeltaResult sigma_delta(const TimeScale& T, double t, double tol = kDefaultDerivativeTol) {
  return delta_derivative(sigma_function(T), T, t, tol);
}

namespace detail {

/// Classical integral over a dense piece, split at the integrand's
/// breakpoints so each panel sees a smooth function.
inline QuadratureResult integrate_dense(const ScaleFunction& f, double lo, double hi, double tol) {
  std::vector<double> cuts{lo};
  for (double bp : f.breakpoints()) {
    if (bp > lo && bp < hi) cuts.push_back(bp);
  }
  cuts.push_back(hi);
  QuadratureResult total;
  const double width = hi - lo;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double piece_tol = tol * (cuts[i + 1] - cuts[i]) / width;
    const QuadratureResult r = integrate_adaptive(f, cuts[i], cuts[i + 1], std::max(piece_tol, 1e-15));
    total.value += r.value;
    total.err_estimate += r.err_estimate;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

}  // namespace detail

/// Cauchy delta integral over [a, b): each right-scattered point t in [a, b)
/// contributes mu(t) f(t); each maximal dense piece of [a, b] contributes its
/// classical integral.
inline IntegralResult delta_integral(const ScaleFunction& f, const TimeScale& T, double a,
                                     double b, double tol = kDefaultIntegralTol) {
  if (!T.contains(a) || !T.contains(b)) {
    throw Error(ErrorCode::kNotInScale, "integration limits must lie in the scale");
  }
  if (a > b) throw Error(ErrorCode::kBadInterval, "integration needs a <= b");
  IntegralResult out;
  if (a == b) return out;
  const auto& segs = T.segments();
  const std::size_t first = *T.segment_index(a);
  const std::size_t last = *T.segment_index(b);
  bool converged = true;
  for (std::size_t i = first; i <= last; ++i) {
    const Segment& s = segs[i];
    const double lo = std::max(s.lo, a);
    const double hi = std::min(s.hi, b);
    if (lo < hi) {
      const QuadratureResult q = detail::integrate_dense(f, lo, hi, tol);
      out.continuous_part += q.value;
      out.err_estimate += q.err_estimate;
      converged = converged && q.converged;
    }
    if (i + 1 < segs.size() && s.hi < b) {
      out.discrete_part += (segs[i + 1].lo - s.hi) * f(s.hi);
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNoConvergence,
                "quadrature of " + f.text() + " did not reach tolerance " + format_real(tol));
  }
  out.value = out.discrete_part + out.continuous_part;
  return out;
}

/// Absolute residual of an identity together with the magnitude of the
/// terms it compares.
struct IdentityResidual {
  double residual = 0.0;
  double scale = 0.0;

  /// residual <= factor * tol * (1 + scale)
  bool within(double tol, double factor = 10.0) const {
    return residual <= factor * tol * (1.0 + scale);
  }
  double ratio(double tol) const { return residual / (tol * (1.0 + scale)); }
};

/// (f o g)^Delta(t) = g^Delta(t) * int_0^1 f'(g(t) + h mu(t) g^Delta(t)) dh,
/// with f' supplied by the caller.
inline DeltaResult chain_rule_derivative(const ScaleFunction& fprime, const ScaleFunction& g,
                                         const TimeScale& T, double t,
                                         double tol = kDefaultDerivativeTol) {
  const DeltaResult gd = delta_derivative(g, T, t, tol);
  const double m = T.mu(t);
  const double gt = g(t);
  const QuadratureResult inner = integrate_adaptive(
      [&](double h) { return fprime(gt + h * m * gd.value); }, 0.0, 1.0, tol * 1e-2);
  if (!inner.converged) {
    throw Error(ErrorCode::kNoConvergence, "chain-rule inner integral did not converge");
  }
  return {gd.value * inner.value, gd.method,
          std::abs(inner.value) * gd.err_estimate + std::abs(gd.value) * inner.err_estimate};
}

/// Image time scale v(T) of a strictly increasing v, mapped segment by segment.
inline TimeScale image_scale(const ScaleFunction& v, const TimeScale& T) {
  const std::vector<double> grid = T.points_per_segment(64);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(v(grid[i]) > v(grid[i - 1]))) {
      throw Error(ErrorCode::kBadSubstitution,
                  "substitution is not strictly increasing near " + format_real(grid[i]));
    }
  }
  std::vector<Segment> mapped;
  for (const auto& s : T.segments()) mapped.push_back({v(s.lo), v(s.hi)});
  for (std::size_t i = 1; i < mapped.size(); ++i) {
    if (!(mapped[i].lo > mapped[i - 1].hi)) {
      throw Error(ErrorCode::kBadSubstitution, "substitution image segments collide");
    }
  }
  return TimeScale::canonicalize(std::move(mapped));
}

/// |(omega o v)^Delta(t) - omega^{~Delta}(v(t)) v^Delta(t)| where the tilde
/// derivative is taken on the image scale v(T).
inline IdentityResidual substitution_check(const ScaleFunction& v, const ScaleFunction& omega,
                                           const TimeScale& T, double t,
                                           double tol = kDefaultDerivativeTol) {
  const TimeScale image = image_scale(v, T);
  const ScaleFunction composed = ScaleFunction::from_callable(
      [v, omega](double s) { return omega(v(s)); }, "(" + omega.text() + ")o(" + v.text() + ")",
      std::vector<double>(v.breakpoints().begin(), v.breakpoints().end()));
  const double lhs = delta_derivative(composed, T, t, tol).value;
  const double rhs =
      delta_derivative(omega, image, v(t), tol).value * delta_derivative(v, T, t, tol).value;
  return {std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))};
}

/// |int_b^c f^Delta - (f(c) - f(b))|.
inline IdentityResidual fundamental_theorem_check(const ScaleFunction& f, const TimeScale& T, double b,
                                        double c, double tol = kDefaultIntegralTol) {
  const ScaleFunction fd = delta_derivative_function(f, T, std::max(tol, kDefaultDerivativeTol));
  const double integral = delta_integral(fd, T, b, c, tol).value;
  return {std::abs(integral - (f(c) - f(b))), std::max({std::abs(integral), std::abs(f(b)), std::abs(f(c))})};
}

/// |int f g^Delta - [f g]_b^c + int f^Delta g^sigma|.
inline IdentityResidual parts_check(const ScaleFunction& f, const ScaleFunction& g, const TimeScale& T,
                          double b, double c, double tol = kDefaultIntegralTol) {
  const double dtol = std::max(tol, kDefaultDerivativeTol);
  const ScaleFunction fd = delta_derivative_function(f, T, dtol);
  const ScaleFunction gd = delta_derivative_function(g, T, dtol);
  const ScaleFunction gs = compose_sigma(g, T);
  const auto times = [](double x, double y) { return x * y; };
  const double i1 = delta_integral(combine(f, gd, times, "f*g^Delta"), T, b, c, tol).value;
  const double i2 = delta_integral(combine(fd, gs, times, "f^Delta*g^sigma"), T, b, c, tol).value;
  const double boundary = f(c) * g(c) - f(b) * g(b);
  return {std::abs(i1 - boundary + i2),
          std::max({std::abs(i1), std::abs(i2), std::abs(f(b) * g(b)), std::abs(f(c) * g(c))})};
}

struct ProductQuotientResiduals {
  IdentityResidual product;
  IdentityResidual quotient;
};

/// Residuals of (fg)^Delta = f^Delta g + f^sigma g^Delta and
/// (f/g)^Delta = (f^Delta g - f g^Delta) / (g g^sigma) at t.
inline ProductQuotientResiduals product_quotient_check(const ScaleFunction& f,
                                                       const ScaleFunction& g, const TimeScale& T,
                                                       double t,
                                                       double tol = kDefaultDerivativeTol) {
  const double st = T.sigma(t);
  const double gt = g(t);
  const double gst = g(st);
  if (gt * gst == 0.0) {
    throw Error(ErrorCode::kQuotientUndefined, "g g^sigma vanishes at " + format_real(t));
  }
  const double fd = delta_derivative(f, T, t, tol).value;
  const double gd = delta_derivative(g, T, t, tol).value;
  const auto product = combine(f, g, [](double x, double y) { return x * y; }, "f*g");
  const auto quotient = combine(f, g, [](double x, double y) { return x / y; }, "f/g");
  ProductQuotientResiduals r;
  const double pd = delta_derivative(product, T, t, tol).value;
  const double pr = fd * gt + f(st) * gd;
  const double qd = delta_derivative(quotient, T, t, tol).value;
  const double qr = (fd * gt - f(t) * gd) / (gt * gst);
  r.product = {std::abs(pd - pr), std::max({std::abs(pd), std::abs(fd * gt), std::abs(f(st) * gd)})};
  r.quotient = {std::abs(qd - qr), std::max({std::abs(qd), std::abs(fd * gt / (gt * gst)),
                                             std::abs(f(t) * gd / (gt * gst))})};
  return r;
}

struct MonotonicityReport {
  bool nondecreasing = true;
  bool derivative_ok = true;
  bool sequence_ok = true;
  double min_derivative = std::numeric_limits<double>::infinity();
  std::optional<double> min_derivative_at;
  double min_increment = std::numeric_limits<double>::infinity();
  std::optional<double> min_increment_at;
};

/// Sampled check that f is nondecreasing on [a, b] in T: f^Delta >= -tol at
/// every grid point of [a, b) and f(t_{i+1}) >= f(t_i) - tol along the grid.
/// A known delta derivative may be supplied in place of the numeric one.
inline MonotonicityReport verify_nondecreasing(const ScaleFunction& f, const TimeScale& T,
                                               double a, double b, double grid_step,
                                               double tol = 1e-7,
                                               const std::optional<ScaleFunction>& derivative = {}) {
  MonotonicityReport rep;
  if (a == b) return rep;
  const TimeScale R = T.restrict(a, b);
  const std::vector<double> grid = R.points(grid_step);
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double ft = f(t);
    if (i > 0) {
      const double inc = ft - prev;
      if (inc < rep.min_increment) {
        rep.min_increment = inc;
        rep.min_increment_at = t;
      }
    }
    prev = ft;
    if (t < b) {
      const double d = derivative ? (*derivative)(t) : delta_derivative(f, R, t).value;
      if (d < rep.min_derivative) {
        rep.min_derivative = d;
        rep.min_derivative_at = t;
      }
    }
  }
  rep.derivative_ok = rep.min_derivative >= -tol;
  rep.sequence_ok = rep.min_increment >= -tol;
  rep.nondecreasing = rep.derivative_ok && rep.sequence_ok;
  return rep;
}

}  // namespace chronoscale
