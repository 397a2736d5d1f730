#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration over a partition of
// user-supplied breakpoints. The worst interval is bisected until the summed
// error estimate meets the requested tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace nvsense::quad {

struct Options {
  double rel_tol = 1e-4;
  double abs_tol = 0.0;
  std::size_t max_intervals = 400000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// 7-point Gauss weights for kronrod_nodes[1], [3], [5], [7]
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kronrod_weights[7];
  double gauss = fc * gauss_weights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kronrod_nodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[i] * pair;
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrate f over [front(points), back(points)], never straddling an
/// interior point. Points must be sorted ascending; duplicates are ignored.
template <class F>
Result integrate(F&& f, std::span<const double> points, const Options& options = {}) {
  std::priority_queue<detail::Panel> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    auto panel = detail::gk15(f, points[i], points[i + 1]);
    total += panel.value;
    error += panel.error;
    heap.push(panel);
  }
  Result result;
  result.intervals = heap.size();
  while (!heap.empty()) {
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(total));
    if (error <= target) {
      result.converged = true;
      break;
    }
    if (result.intervals >= options.max_intervals) break;
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at machine precision
    heap.pop();
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++result.intervals;
  }
  if (heap.empty()) result.converged = true;
  // re-sum to shed accumulated cancellation from the running updates
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  result.value = total;
  result.error = error;
  return result;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& options = {}) {
  const std::array<double, 2> points{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(points), options);
}

}  // namespace nvsense::quad
