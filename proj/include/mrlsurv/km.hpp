#pragma once

// Kaplan-Meier product-limit estimator and the restricted mean residual life
// computed from it.

#include <cstddef>
#include <vector>

#include "mrlsurv/dataset.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/step_function.hpp"

namespace mrlsurv {

struct KmCurve {
  std::vector<double> event_times;   // distinct, ascending
  std::vector<std::size_t> at_risk;  // n_j: subjects with time >= event_times[j]
  std::vector<std::size_t> deaths;   // d_j
  StepFunction survival;             // knots == event_times
  std::vector<double> censor_marks;  // every censored time, with multiplicity
  std::size_t sample_size = 0;
  double max_time = 0.0;             // largest observed time, event or not
};

inline KmCurve km_fit(const SurvivalSample& sample) {
  KmCurve curve;
  curve.sample_size = sample.size();
  curve.max_time = sample.max_time();

  std::vector<double> values;
  const auto obs = sample.observations();
  std::size_t at_risk = obs.size();
  double surv = 1.0;
  for (std::size_t i = 0; i < obs.size();) {
    const double t = obs[i].time;
    std::size_t deaths = 0, censored = 0;
    for (; i < obs.size() && obs[i].time == t; ++i) {
      if (obs[i].event) {
        ++deaths;
      } else {
        ++censored;
        curve.censor_marks.push_back(t);
      }
    }
    if (deaths > 0) {
      const double factor =
          static_cast<double>(at_risk - deaths) / static_cast<double>(at_risk);
      surv *= factor;
      curve.event_times.push_back(t);
      curve.at_risk.push_back(at_risk);
      curve.deaths.push_back(deaths);
      values.push_back(surv);
    }
    at_risk -= deaths + censored;
  }
  curve.survival = StepFunction(1.0, curve.event_times, std::move(values));
  return curve;
}

// Area under the KM curve on [t, u] divided by S(t).
inline double restricted_mrl_km(const KmCurve& curve, double t, double u) {
  if (t > u) throw DomainError("restricted MRL requires t <= u");
  const double s_t = curve.survival(t);
  if (s_t <= 0.0) throw EstimationError("MRL undefined: zero survival at t");
  return curve.survival.integral(t, u) / s_t;
}

}  // namespace mrlsurv
