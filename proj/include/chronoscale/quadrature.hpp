#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace chronoscale {

struct QuadratureResult {
  double value = 0.0;
  double err_estimate = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double kronrod;
  double gauss;
  double abs_kronrod;
};

template <class F>
Panel gauss_kronrod_15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  double ak = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    k += kWgk[j] * (f1 + f2);
    ak += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
  }
  return {k * half, g * half, ak * std::abs(half)};
}

// Error of a panel that counts against the budget; differences at the
// rounding level of the panel's own sum are treated as exact.
inline double budget_error(const Panel& p) {
  const double err = std::abs(p.kronrod - p.gauss);
  return err <= 50.0 * std::numeric_limits<double>::epsilon() * p.abs_kronrod ? 0.0 : err;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [lo, hi]:
/// the panel with the largest error is bisected until the summed error is
/// at most tol * max(1, |integral|). The rule never samples the endpoints
/// themselves. When max_subdivisions runs out, or a panel can no longer be
/// split in floating point, the result is marked non-converged.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi, double tol,
                                    std::size_t max_subdivisions = 2000) {
  QuadratureResult acc;
  if (lo == hi) return acc;
  struct Item {
    double lo;
    double hi;
    detail::Panel panel;
    double err;
  };
  const auto smaller_error = [](const Item& x, const Item& y) { return x.err < y.err; };
  std::priority_queue<Item, std::vector<Item>, decltype(smaller_error)> heap(smaller_error);

  const detail::Panel first = detail::gauss_kronrod_15(f, lo, hi);
  acc.evaluations = 15;
  heap.push({lo, hi, first, detail::budget_error(first)});
  double value = first.kronrod;
  double err = heap.top().err;
  for (std::size_t n = 0; err > tol * std::max(1.0, std::abs(value)); ++n) {
    const Item top = heap.top();
    const double mid = 0.5 * (top.lo + top.hi);
    if (n == max_subdivisions || !(top.lo < mid && mid < top.hi)) {
      acc.converged = false;
      break;
    }
    heap.pop();
    const detail::Panel left = detail::gauss_kronrod_15(f, top.lo, mid);
    const detail::Panel right = detail::gauss_kronrod_15(f, mid, top.hi);
    acc.evaluations += 30;
    heap.push({top.lo, mid, left, detail::budget_error(left)});
    heap.push({mid, top.hi, right, detail::budget_error(right)});
    value += left.kronrod + right.kronrod - top.panel.kronrod;
    err += detail::budget_error(left) + detail::budget_error(right) - top.err;
  }
  // Re-sum from the panels so the running updates leave no drift.
  acc.value = 0.0;
  acc.err_estimate = 0.0;
  for (; !heap.empty(); heap.pop()) {
    acc.value += heap.top().panel.kronrod;
    acc.err_estimate += std::abs(heap.top().panel.kronrod - heap.top().panel.gauss);
  }
  return acc;
}

}  // namespace chronoscale
