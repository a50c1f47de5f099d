#pragma once

// Generalized Pareto tail: censored log-likelihood, maximum likelihood fit and
// mean residual life at the threshold.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mrlsurv/dataset.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/nelder_mead.hpp"

namespace mrlsurv {

struct Exceedance {
  double excess = 0.0;  // observed time minus threshold
  bool event = false;
};

struct GpdFit {
  double shape = 0.0;  // xi
  double scale = 1.0;  // sigma_u
  double threshold = 0.0;
  std::size_t n_exceedances = 0;
  std::size_t n_tail_events = 0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  bool at_lower_bound = false;  // shape pinned to the lower box edge
};

struct GpdOptions {
  double shape_lower = -0.99;
  double shape_upper = 0.99;
  double bound_margin = 1e-4;  // a shape this close to a box edge counts as on it
  SimplexOptions simplex{};
};

// Below this |xi| the likelihood uses the exponential limit, carried to
// second order in xi so the switch is continuous at the cutoff.
inline constexpr double kSmallShape = 1e-8;

// Censored GPD log-likelihood. Events contribute the log density
//   -log(sigma) - (1/xi + 1) log(1 + xi t / sigma),
// censored excesses the log survival
//   -(1/xi) log(1 + xi t / sigma).
// Returns nullopt when some excess falls outside the support.
inline std::optional<double> gpd_log_likelihood(std::span<const Exceedance> exceedances,
                                                double shape, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("GPD scale must be positive");
  if (!std::isfinite(shape)) throw DomainError("GPD shape must be finite");
  const double log_scale = std::log(scale);
  const bool small = std::abs(shape) < kSmallShape;
  double ll = 0.0;
  for (const auto& e : exceedances) {
    const double z = e.excess / scale;
    if (!(1.0 + shape * z > 0.0)) return std::nullopt;
    double cum_hazard;  // (1/xi) log(1 + xi z)
    double log_base;    // log(1 + xi z)
    if (small) {
      cum_hazard = z - shape * z * z / 2.0 + shape * shape * z * z * z / 3.0;
      log_base = shape * z - shape * shape * z * z / 2.0;
    } else {
      log_base = std::log1p(shape * z);
      cum_hazard = log_base / shape;
    }
    ll -= cum_hazard;
    if (e.event) ll -= log_scale + log_base;
  }
  return ll;
}

inline std::vector<Exceedance> exceedances_above(const SurvivalSample& sample, double threshold) {
  std::vector<Exceedance> out;
  for (const auto& obs : sample.observations()) {
    if (obs.time > threshold) out.push_back({obs.time - threshold, obs.event});
  }
  return out;
}

namespace detail {

struct GpdStart {
  double shape;
  double scale;
};

inline std::array<GpdStart, 3> gpd_starts(std::span<const Exceedance> data, double max_excess) {
  double mean = 0.0;
  for (const auto& e : data) mean += e.excess;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (const auto& e : data) var += (e.excess - mean) * (e.excess - mean);
  var /= static_cast<double>(data.size() - 1);

  GpdStart moment{0.0, mean};
  if (var > 0.0) {
    const double ratio = mean * mean / var;
    moment = {std::clamp(0.5 * (1.0 - ratio), -0.5, 0.9), 0.5 * mean * (1.0 + ratio)};
  }
  // A negative shape needs sigma > -xi * max excess to keep every point in support.
  if (moment.shape < 0.0) moment.scale = std::max(moment.scale, -1.05 * moment.shape * max_excess);
  return {moment, GpdStart{0.0, mean}, GpdStart{0.5, 0.5 * mean}};
}

}  // namespace detail

inline GpdFit fit_gpd(std::span<const Exceedance> exceedances, double threshold = 0.0,
                      const GpdOptions& opts = {}) {
  if (exceedances.size() < 2) throw EstimationError("insufficient tail data");
  std::size_t events = 0;
  double max_excess = 0.0;
  for (const auto& e : exceedances) {
    if (!std::isfinite(e.excess) || e.excess < 0.0) {
      throw DomainError("exceedances must be finite and non-negative");
    }
    events += e.event ? 1 : 0;
    max_excess = std::max(max_excess, e.excess);
  }
  if (events == 0) throw EstimationError("all tail observations censored");
  if (max_excess <= 0.0) throw EstimationError("insufficient tail data: all excesses are zero");

  // Parameters are (xi, log sigma).
  auto objective = [&](const std::array<double, 2>& p) {
    if (!(p[0] > opts.shape_lower && p[0] < opts.shape_upper) || !std::isfinite(p[1])) {
      return std::numeric_limits<double>::infinity();
    }
    const auto ll = gpd_log_likelihood(exceedances, p[0], std::exp(p[1]));
    return ll ? -*ll : std::numeric_limits<double>::infinity();
  };

  SimplexResult<2> best;
  for (const auto& start : detail::gpd_starts(exceedances, max_excess)) {
    auto r = nelder_mead<2>(objective, {start.shape, std::log(start.scale)}, {0.1, 0.2},
                            opts.simplex);
    if (r.value < best.value) best = r;
  }
  if (!std::isfinite(best.value)) throw EstimationError("GPD fit found no feasible parameters");

  // Restart from the best vertex; a fresh simplex escapes premature collapse.
  auto polished = nelder_mead<2>(objective, best.point, {0.05, 0.05}, opts.simplex);
  if (polished.value <= best.value) {
    polished.iterations += best.iterations;
    best = polished;
  } else {
    best.converged = best.converged && polished.converged;
  }

  GpdFit fit;
  fit.shape = best.point[0];
  fit.scale = std::exp(best.point[1]);
  fit.threshold = threshold;
  fit.n_exceedances = exceedances.size();
  fit.n_tail_events = events;
  fit.log_likelihood = *gpd_log_likelihood(exceedances, fit.shape, fit.scale);
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  fit.at_lower_bound = fit.shape <= opts.shape_lower + opts.bound_margin;
  if (fit.shape >= opts.shape_upper - opts.bound_margin) {
    throw EstimationError("infinite-mean tail fit: GPD shape reached its upper bound");
  }
  return fit;
}

// Mean of the fitted excess distribution: sigma / (1 - xi).
inline double gpd_mrl_at_threshold(const GpdFit& fit) {
  if (!(fit.scale > 0.0)) throw DomainError("GPD scale must be positive");
  if (fit.shape >= 1.0) throw EstimationError("infinite mean residual life: GPD shape >= 1");
  return fit.scale / (1.0 - fit.shape);
}

}  // namespace mrlsurv
