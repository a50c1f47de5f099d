#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mrlsurv/step_function.hpp"

using namespace mrlsurv;

namespace {

// {(2,1),(3,0),(4,1),(5,1)}: 1 on [0,2), 3/4 on [2,4), 3/8 on [4,5), 0 after.
StepFunction example_curve() { return StepFunction(1.0, {2, 4, 5}, {0.75, 0.375, 0.0}); }

}  // namespace

TEST_CASE("step_eval is right-continuous", "[step]") {
  CHECK(step_eval(StepFunction::constant(1.0), 7.0) == 1.0);
  const auto f = example_curve();
  CHECK(step_eval(f, 0.0) == 1.0);
  CHECK(step_eval(f, 1.999) == 1.0);
  CHECK(step_eval(f, 2.0) == 0.75);
  CHECK(step_eval(f, 3.9) == 0.75);
  CHECK(step_eval(f, 4.0) == 0.375);
  CHECK(step_eval(f, 5.0) == 0.0);
  CHECK(step_eval(f, 1e9) == 0.0);
}

TEST_CASE("step_eval rejects invalid times", "[step]") {
  const auto f = example_curve();
  CHECK_THROWS_AS(step_eval(f, -0.1), DomainError);
  CHECK_THROWS_AS(step_eval(f, std::nan("")), DomainError);
  CHECK_THROWS_AS(step_eval(f, INFINITY), DomainError);
}

TEST_CASE("step function construction validates knots", "[step]") {
  CHECK_THROWS_AS(StepFunction(1.0, {1, 1}, {0.5, 0.2}), DomainError);
  CHECK_THROWS_AS(StepFunction(1.0, {2, 1}, {0.5, 0.2}), DomainError);
  CHECK_THROWS_AS(StepFunction(1.0, {-1}, {0.5}), DomainError);
  CHECK_THROWS_AS(StepFunction(1.0, {1}, {}), DomainError);
}

TEST_CASE("step_integral is an exact segment sum", "[step]") {
  CHECK(step_integral(StepFunction::constant(1.0), 0, 5) == 5.0);
  const auto f = example_curve();
  CHECK(step_integral(f, 3, 3) == 0.0);
  CHECK(step_integral(f, 0, 5) == 3.875);
  CHECK(step_integral(f, 2, 5) == 1.875);
  CHECK(step_integral(f, 2.5, 4.5) == 0.75 * 1.5 + 0.375 * 0.5);
  CHECK(step_integral(f, 5, 100) == 0.0);
  CHECK_THROWS_AS(step_integral(f, 3, 2), DomainError);
}

TEST_CASE("step_integral is additive", "[step][property]") {
  std::mt19937_64 rng(7);
  // Dyadic knots, values and bounds keep every product and sum exact.
  auto dyadic = [&](int range) { return static_cast<double>(rng() % (range * 8)) / 8.0; };
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> knots, values;
    double level = 1.0;
    double t = 0.0;
    const int k = static_cast<int>(rng() % 8);
    for (int i = 0; i < k; ++i) {
      t += 0.125 * static_cast<double>(1 + rng() % 16);
      level = static_cast<double>(rng() % 16) / 16.0;
      knots.push_back(t);
      values.push_back(level);
    }
    const StepFunction f(1.0, knots, values);
    double a = dyadic(20), b = dyadic(20), c = dyadic(20);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    REQUIRE(f.integral(a, c) == f.integral(a, b) + f.integral(b, c));
  }
}
