#pragma once

// Derivative-free simplex minimizer (Nelder-Mead with the standard
// reflection / expansion / contraction / shrink coefficients).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace mrlsurv {

struct SimplexOptions {
  double tolerance = 1e-7;  // stop when every vertex is this close to the best one
  int max_iterations = 500;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> point{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Minimizes `f` starting from the simplex {start, start + step_i e_i}.
// `f` may return +inf to mark infeasible points; those are never accepted
// over finite ones.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                             const std::array<double, N>& step,
                             const SimplexOptions& opts = {}) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> x;
  std::array<double, N + 1> fx;
  x[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    x[i + 1] = start;
    x[i + 1][i] += step[i];
  }
  for (std::size_t j = 0; j <= N; ++j) fx[j] = f(x[j]);

  std::array<std::size_t, N + 1> order;
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::array<Point, N + 1> xs;
    std::array<double, N + 1> fs;
    for (std::size_t k = 0; k <= N; ++k) {
      xs[k] = x[order[k]];
      fs[k] = fx[order[k]];
    }
    x = xs;
    fx = fs;
  };

  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
      double sq = 0.0;
      for (std::size_t i = 0; i < N; ++i) sq += (x[j][i] - x[0][i]) * (x[j][i] - x[0][i]);
      d = std::max(d, std::sqrt(sq));
    }
    return d;
  };

  auto along = [](const Point& from, const Point& to, double scale) {
    Point p;
    for (std::size_t i = 0; i < N; ++i) p[i] = from[i] + scale * (to[i] - from[i]);
    return p;
  };

  SimplexResult<N> result;
  int iter = 0;
  for (;; ++iter) {
    sort_vertices();
    if (std::isfinite(fx[0]) && diameter() < opts.tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= opts.max_iterations) break;

    Point centroid{};
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i < N; ++i) centroid[i] += x[j][i] / static_cast<double>(N);

    const Point xr = along(centroid, x[N], -opts.reflection);
    const double fr = f(xr);
    if (fr < fx[0]) {
      const Point xe = along(centroid, xr, opts.expansion);
      const double fe = f(xe);
      if (fe < fr) {
        x[N] = xe;
        fx[N] = fe;
      } else {
        x[N] = xr;
        fx[N] = fr;
      }
      continue;
    }
    if (fr < fx[N - 1]) {
      x[N] = xr;
      fx[N] = fr;
      continue;
    }
    // Outside contraction when the reflected point beats the worst, inside otherwise.
    const bool outside = fr < fx[N];
    const Point xc = outside ? along(centroid, xr, opts.contraction)
                             : along(centroid, x[N], opts.contraction);
    const double fc = f(xc);
    if (fc < (outside ? fr : fx[N])) {
      x[N] = xc;
      fx[N] = fc;
      continue;
    }
    for (std::size_t j = 1; j <= N; ++j) {
      x[j] = along(x[0], x[j], opts.shrink);
      fx[j] = f(x[j]);
    }
  }
  result.point = x[0];
  result.value = fx[0];
  result.iterations = iter;
  return result;
}

}  // namespace mrlsurv
