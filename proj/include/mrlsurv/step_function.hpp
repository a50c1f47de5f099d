#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mrlsurv/error.hpp"

namespace mrlsurv {

// Right-continuous piecewise-constant function on [0, inf).
//
// Takes `initial_value` on [0, knots[0]) and `values[i]` on
// [knots[i], knots[i+1]), the last value extending to infinity.
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(double initial_value, std::vector<double> knots, std::vector<double> values)
      : initial_(initial_value), knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() != values_.size()) {
      throw DomainError("step function needs one value per knot");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i]) || knots_[i] < 0.0) {
        throw DomainError("step function knots must be finite and non-negative");
      }
      if (i > 0 && !(knots_[i - 1] < knots_[i])) {
        throw DomainError("step function knots must be strictly increasing");
      }
    }
  }

  static StepFunction constant(double value) { return StepFunction(value, {}, {}); }

  double initial_value() const noexcept { return initial_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  bool empty() const noexcept { return knots_.empty(); }

  double operator()(double t) const {
    check_time(t);
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  // Exact area on [a, b]: sum of value x segment length.
  double integral(double a, double b) const {
    check_time(a);
    check_time(b);
    if (a > b) throw DomainError("integration bounds out of order: a > b");
    if (a == b) return 0.0;

    auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
    double left = a;
    double level = it == knots_.begin() ? initial_ : *(values_.begin() + (it - knots_.begin()) - 1);
    double area = 0.0;
    for (; it != knots_.end() && *it < b; ++it) {
      area += level * (*it - left);
      left = *it;
      level = values_[static_cast<std::size_t>(it - knots_.begin())];
    }
    area += level * (b - left);
    return area;
  }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  static void check_time(double t) {
    if (!std::isfinite(t) || t < 0.0) {
      throw DomainError("step function argument must be finite and non-negative");
    }
  }

  double initial_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

inline double step_eval(const StepFunction& f, double t) { return f(t); }

inline double step_integral(const StepFunction& f, double a, double b) {
  return f.integral(a, b);
}

}  // namespace mrlsurv
