#pragma once

// Hybrid semi-parametric mean residual life: Kaplan-Meier restricted MRL below
// a threshold u plus a Generalized Pareto tail above it,
//
//   m(t) = int_t^u S(s) ds / S(t)  +  m(u) S(u) / S(t),   m(u) = sigma / (1 - xi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mrlsurv/dataset.hpp"
#include "mrlsurv/detail/text.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/gpd.hpp"
#include "mrlsurv/km.hpp"
#include "mrlsurv/quantile.hpp"

namespace mrlsurv {

struct ThresholdConfig {
  enum class Mode { quantile, explicit_value };

  Mode mode = Mode::quantile;
  double quantile = 0.8;  // of the uncensored times
  double explicit_value = 0.0;
  std::size_t min_exceedances = 10;

  static ThresholdConfig at_quantile(double q, std::size_t min_exceedances = 10) {
    return {Mode::quantile, q, 0.0, min_exceedances};
  }
  static ThresholdConfig at_value(double u, std::size_t min_exceedances = 10) {
    return {Mode::explicit_value, 0.8, u, min_exceedances};
  }

  void validate() const {
    if (!(quantile > 0.0 && quantile < 1.0)) {
      throw DomainError("threshold quantile must lie strictly between 0 and 1");
    }
    if (min_exceedances < 2) throw DomainError("min_exceedances must be at least 2");
    if (mode == Mode::explicit_value && (!std::isfinite(explicit_value) || explicit_value < 0.0)) {
      throw DomainError("explicit threshold must be finite and non-negative");
    }
  }
};

inline double select_threshold(const SurvivalSample& sample, const ThresholdConfig& config) {
  config.validate();
  double u = config.explicit_value;
  if (config.mode == ThresholdConfig::Mode::quantile) {
    std::vector<double> event_times;
    for (const auto& obs : sample.observations())
      if (obs.event) event_times.push_back(obs.time);
    if (event_times.empty()) throw EstimationError("no events for quantile threshold");
    u = quantile_sorted(event_times, config.quantile);
  }
  const auto obs = sample.observations();
  const auto first_above = std::upper_bound(
      obs.begin(), obs.end(), u, [](double v, const Observation& o) { return v < o.time; });
  const auto above = static_cast<std::size_t>(obs.end() - first_above);
  if (above < config.min_exceedances || !(u < sample.max_time())) {
    throw EstimationError("threshold too high: fewer than min_exceedances tail observations (u = " +
                          detail::format_sig(u, 6) + ", " + std::to_string(above) + " above, " +
                          std::to_string(config.min_exceedances) + " required)");
  }
  return u;
}

struct MrlPoint {
  double km_component = 0.0;
  double tail_component = 0.0;
  double value = 0.0;
};

struct MrlCurve {
  std::vector<double> grid;  // ascending, last point == threshold
  std::vector<double> values;
  std::vector<double> km_component;
  std::vector<double> tail_component;
  double threshold = 0.0;
  double mrl_at_threshold = 0.0;  // sigma / (1 - xi)
  GpdFit gpd;
  StepFunction survival;  // KM estimate the curve was built from
  std::size_t source_n = 0;
};

// Evaluates the hybrid estimator at one time, given the KM curve, u and m(u).
inline MrlPoint hybrid_mrl_point(const StepFunction& survival, double threshold,
                                 double mrl_at_threshold, double t) {
  if (!(t >= 0.0 && t <= threshold)) {
    throw DomainError("MRL evaluation time " + detail::format_sig(t, 6) +
                      " outside [0, threshold]");
  }
  const double s_t = survival(t);
  if (!(s_t > 0.0)) {
    throw EstimationError("MRL undefined at t = " + detail::format_sig(t, 6) +
                          ": zero survival");
  }
  MrlPoint p;
  p.km_component = survival.integral(t, threshold) / s_t;
  p.tail_component = mrl_at_threshold * (survival(threshold) / s_t);
  p.value = p.km_component + p.tail_component;
  return p;
}

inline MrlPoint mrl_at(const MrlCurve& curve, double t) {
  return hybrid_mrl_point(curve.survival, curve.threshold, curve.mrl_at_threshold, t);
}

namespace detail {

inline std::vector<double> mrl_grid(const SurvivalSample& sample, double u,
                                    std::span<const double> requested) {
  std::vector<double> grid;
  if (requested.empty()) {
    grid.push_back(0.0);
    for (const auto& obs : sample.observations())
      if (obs.time <= u) grid.push_back(obs.time);
  } else {
    for (const double t : requested) {
      if (!std::isfinite(t) || t < 0.0) throw DomainError("grid points must be finite and >= 0");
      if (t > u) {
        throw DomainError("grid point " + format_sig(t, 6) + " lies beyond the threshold " +
                          format_sig(u, 6));
      }
      grid.push_back(t);
    }
  }
  grid.push_back(u);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace detail

// Threshold selection, censored GPD fit of the exceedances (events and
// censorings above u), KM restricted MRL and tail combination on a grid in
// [0, u]. An empty `grid` selects {0} + observed times <= u + {u}.
inline MrlCurve fit_hybrid_mrl(const SurvivalSample& sample, const ThresholdConfig& config = {},
                               std::span<const double> grid = {},
                               const GpdOptions& gpd_options = {}) {
  const double u = select_threshold(sample, config);
  const KmCurve km = km_fit(sample);
  const auto tail = exceedances_above(sample, u);

  MrlCurve curve;
  curve.threshold = u;
  curve.gpd = fit_gpd(tail, u, gpd_options);
  curve.mrl_at_threshold = gpd_mrl_at_threshold(curve.gpd);
  curve.survival = km.survival;
  curve.source_n = sample.size();
  curve.grid = detail::mrl_grid(sample, u, grid);

  const auto n = curve.grid.size();
  curve.values.reserve(n);
  curve.km_component.reserve(n);
  curve.tail_component.reserve(n);
  for (const double t : curve.grid) {
    const auto p = hybrid_mrl_point(curve.survival, u, curve.mrl_at_threshold, t);
    curve.km_component.push_back(p.km_component);
    curve.tail_component.push_back(p.tail_component);
    curve.values.push_back(p.value);
  }
  return curve;
}

}  // namespace mrlsurv
