#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "chronoscale/error.hpp"
#include "chronoscale/expr.hpp"
#include "chronoscale/format.hpp"
#include "chronoscale/time_scale.hpp"

namespace chronoscale {

/// Point-to-value table on a time scale. Between two adjacent knots of the
/// same dense segment the value is interpolated linearly; anywhere else a
/// query that is not a knot raises TabulationGap.
class Tabulation {
 public:
  Tabulation(TimeScale domain, std::vector<double> knots, std::vector<double> values)
      : domain_(std::move(domain)), knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size()) {
      throw Error(ErrorCode::kBadArgument, "tabulation needs matching, nonempty knots and values");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (i && !(knots_[i - 1] < knots_[i])) {
        throw Error(ErrorCode::kBadArgument, "tabulation knots must be strictly increasing");
      }
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::kBadArgument, "tabulation values must be finite");
      }
      if (!domain_.contains(knots_[i])) {
        throw Error(ErrorCode::kNotInScale,
                    "tabulation knot " + format_real(knots_[i]) + " is outside its scale");
      }
    }
  }

  const TimeScale& domain() const { return domain_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const {
    auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    if (it != knots_.end() && *it == t) return values_[it - knots_.begin()];
    if (it != knots_.begin() && it != knots_.end()) {
      const std::size_t hi = it - knots_.begin();
      const std::size_t lo = hi - 1;
      const auto seg = domain_.segment_index(knots_[lo]);
      if (seg) {
        const Segment& s = domain_.segments()[*seg];
        if (!s.is_point() && knots_[hi] <= s.hi) {
          const double w = (t - knots_[lo]) / (knots_[hi] - knots_[lo]);
          return values_[lo] + w * (values_[hi] - values_[lo]);
        }
      }
    }
    throw Error(ErrorCode::kTabulationGap, "no tabulated value at " + format_real(t));
  }

 private:
  TimeScale domain_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Real-valued function on a time scale: an expression in x, a tabulation,
/// or a derived callable. Immutable and shareable across threads.
class ScaleFunction {
 public:
  using Callable = std::function<double(double)>;

  explicit ScaleFunction(Expr expr) {
    auto st = std::make_shared<State>();
    st->text = expr.to_string();
    st->body = std::move(expr);
    state_ = std::move(st);
  }

  explicit ScaleFunction(Tabulation table) {
    auto st = std::make_shared<State>();
    st->text = "<tabulation of " + std::to_string(table.knots().size()) + " points>";
    st->breakpoints = table.knots();
    st->body = std::move(table);
    state_ = std::move(st);
  }

  static ScaleFunction parse(std::string_view text) {
    ScaleFunction f(parse_expr(text));
    std::const_pointer_cast<State>(f.state_)->text = std::string(text);
    return f;
  }

  static ScaleFunction constant(double c) { return ScaleFunction(Expr::constant(c)); }

  /// Derived function; `breakpoints` lists points where the function may fail
  /// to be smooth (quadrature splits there, derivatives do not step across).
  static ScaleFunction from_callable(Callable fn, std::string description,
                                     std::vector<double> breakpoints = {}) {
    ScaleFunction f;
    auto st = std::make_shared<State>();
    st->body = std::move(fn);
    st->text = std::move(description);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    st->breakpoints = std::move(breakpoints);
    f.state_ = std::move(st);
    return f;
  }

  double operator()(double t) const {
    return std::visit(
        [t](const auto& body) -> double {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, Expr>) {
            return body.eval(t);
          } else {
            return body(t);
          }
        },
        state_->body);
  }

  const std::string& text() const { return state_->text; }
  std::span<const double> breakpoints() const { return state_->breakpoints; }

  const Expr* expr() const { return std::get_if<Expr>(&state_->body); }
  const Tabulation* tabulation() const { return std::get_if<Tabulation>(&state_->body); }

  bool has_breakpoint(double t) const {
    return std::binary_search(state_->breakpoints.begin(), state_->breakpoints.end(), t);
  }

  std::optional<double> next_breakpoint_after(double t) const {
    const auto& bp = state_->breakpoints;
    auto it = std::upper_bound(bp.begin(), bp.end(), t);
    if (it == bp.end()) return std::nullopt;
    return *it;
  }

  std::optional<double> prev_breakpoint_before(double t) const {
    const auto& bp = state_->breakpoints;
    auto it = std::lower_bound(bp.begin(), bp.end(), t);
    if (it == bp.begin()) return std::nullopt;
    return *(it - 1);
  }

 private:
  struct State {
    std::variant<Expr, Tabulation, Callable> body = Expr::constant(0.0);
    std::string text;
    std::vector<double> breakpoints;
  };

  ScaleFunction() = default;

  std::shared_ptr<const State> state_;
};

inline double eval(const ScaleFunction& f, double t) { return f(t); }

inline std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Pointwise op(f(t)).
template <class Op>
ScaleFunction transform(const ScaleFunction& f, Op op, std::string description) {
  return ScaleFunction::from_callable([f, op](double t) { return op(f(t)); },
                                      std::move(description),
                                      std::vector<double>(f.breakpoints().begin(),
                                                          f.breakpoints().end()));
}

/// Pointwise op(f(t), g(t)).
template <class Op>
ScaleFunction combine(const ScaleFunction& f, const ScaleFunction& g, Op op,
                      std::string description) {
  return ScaleFunction::from_callable([f, g, op](double t) { return op(f(t), g(t)); },
                                      std::move(description),
                                      merge_breakpoints(f.breakpoints(), g.breakpoints()));
}

/// Real power guarded against domain errors: negative bases need an integer
/// exponent and zero bases a nonnegative one.
inline double checked_pow(double base, double exponent) {
  if (base < 0.0 && exponent != std::floor(exponent)) {
    throw Error(ErrorCode::kEvalDomain, "negative base " + format_real(base) +
                                            " raised to non-integer power");
  }
  if (base == 0.0 && exponent < 0.0) {
    throw Error(ErrorCode::kEvalDomain, "zero raised to a negative power");
  }
  const double r = std::pow(base, exponent);
  if (!std::isfinite(r)) throw Error(ErrorCode::kEvalDomain, "power overflow");
  return r;
}

}  // namespace chronoscale
