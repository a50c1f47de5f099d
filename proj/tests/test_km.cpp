#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mrlsurv/km.hpp"
#include "support/oracles.hpp"

using namespace mrlsurv;
using mrlsurv::testing::RawObs;

namespace {

SurvivalSample sample_of(std::vector<double> times, std::vector<int> events) {
  return SurvivalSample(times, events);
}

}  // namespace

TEST_CASE("km_fit on uncensored data is the empirical survival", "[km]") {
  const auto km = km_fit(sample_of({1, 2, 3}, {1, 1, 1}));
  CHECK(km.survival(0.5) == 1.0);
  CHECK(km.survival(1.0) == 2.0 / 3.0);
  CHECK(km.survival(2.5) == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(km.survival(3.0) == 0.0);
  CHECK(km.at_risk == std::vector<std::size_t>{3, 2, 1});
  CHECK(km.deaths == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("km_fit with all observations censored stays at one", "[km]") {
  const auto km = km_fit(sample_of({1, 4, 9}, {0, 0, 0}));
  CHECK(km.event_times.empty());
  CHECK(km.survival(9.0) == 1.0);
  CHECK(km.censor_marks == std::vector<double>{1, 4, 9});
}

TEST_CASE("km_fit on the worked example", "[km]") {
  const auto km = km_fit(sample_of({2, 3, 4, 5}, {1, 0, 1, 1}));
  CHECK(km.event_times == std::vector<double>{2, 4, 5});
  CHECK(km.at_risk == std::vector<std::size_t>{4, 2, 1});
  CHECK(km.survival(1.0) == 1.0);
  CHECK(km.survival(2.0) == 0.75);
  CHECK(km.survival(3.9) == 0.75);
  CHECK(km.survival(4.0) == 0.375);
  CHECK(km.survival(5.0) == 0.0);
  CHECK(km.censor_marks == std::vector<double>{3});
  CHECK(km.max_time == 5.0);
}

TEST_CASE("censorings after the last event extend the plateau", "[km]") {
  const auto km = km_fit(sample_of({1, 2, 7, 8}, {1, 1, 0, 0}));
  CHECK(km.survival(8.0) == 0.5);
  CHECK(km.survival.knots().size() == 2);
}

TEST_CASE("ties between an event and a censoring treat the event first", "[km]") {
  const auto km = km_fit(sample_of({2, 2, 3}, {0, 1, 1}));
  CHECK(km.at_risk.front() == 3);
  CHECK(km.survival(2.0) == 2.0 / 3.0);
  // last observation is an event with one at risk
  CHECK(km.survival(3.0) == 0.0);
}

TEST_CASE("restricted_mrl_km", "[km]") {
  const auto km = km_fit(sample_of({2, 3, 4, 5}, {1, 0, 1, 1}));
  CHECK(restricted_mrl_km(km, 2, 5) == 2.5);
  CHECK(restricted_mrl_km(km, 3, 3) == 0.0);
  const auto flat = km_fit(sample_of({10, 12}, {0, 0}));
  CHECK(restricted_mrl_km(flat, 1.5, 9.0) == 7.5);
  CHECK_THROWS_WITH(restricted_mrl_km(km, 5, 6), "MRL undefined: zero survival at t");
  CHECK_THROWS_AS(restricted_mrl_km(km, 3, 2), DomainError);
}

TEST_CASE("km_fit matches the expanded product on small random samples", "[km][oracle]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<RawObs> raw;
    std::vector<double> times;
    std::vector<int> events;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(rng() % 6) + (rng() % 2 ? 0.5 : 0.0);
      const int e = static_cast<int>(rng() % 3 != 0);
      raw.push_back({t, e == 1});
      times.push_back(t);
      events.push_back(e);
    }
    const auto km = km_fit(SurvivalSample(times, events));
    const auto want = mrlsurv::testing::km_product_oracle(raw);
    REQUIRE(km.event_times.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      REQUIRE(km.event_times[k] == want[k].first);
      REQUIRE(km.survival(want[k].first) == want[k].second);
    }
    // invariants
    if (!km.at_risk.empty()) REQUIRE(km.at_risk.front() <= n);
    for (std::size_t j = 1; j < km.at_risk.size(); ++j) {
      REQUIRE(km.at_risk[j] <= km.at_risk[j - 1] - km.deaths[j - 1]);
    }
    std::size_t censored = 0;
    for (int e : events) censored += e == 0;
    REQUIRE(km.censor_marks.size() == censored);
    const SurvivalSample sorted(times, events);
    const auto& last = sorted.observations().back();
    REQUIRE((km.survival(km.max_time) == 0.0) == last.event);
  }
}

TEST_CASE("without censoring KM equals one minus the ECDF", "[km][property]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<double> times;
    for (std::size_t i = 0; i < n; ++i) times.push_back(static_cast<double>(rng() % 10));
    const auto km = km_fit(SurvivalSample(times, std::vector<int>(n, 1)));
    for (double t = 0.0; t <= 10.0; t += 0.25) {
      const auto below_or_at = std::count_if(times.begin(), times.end(), [&](double x) { return x <= t; });
      const double want = 1.0 - static_cast<double>(below_or_at) / static_cast<double>(n);
      REQUIRE(km.survival(t) == Catch::Approx(want).margin(1e-12));
    }
  }
}

TEST_CASE("restricted MRL is bounded by the window length", "[km][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    std::vector<double> times;
    std::vector<int> events;
    for (std::size_t i = 0; i < n; ++i) {
      times.push_back(static_cast<double>(rng() % 1000) / 37.0);
      events.push_back(static_cast<int>(rng() % 2));
    }
    const auto km = km_fit(SurvivalSample(times, events));
    const double u = static_cast<double>(rng() % 1000) / 37.0;
    const double t = u * static_cast<double>(rng() % 100) / 100.0;
    if (km.survival(t) <= 0.0) continue;
    const double m = restricted_mrl_km(km, t, u);
    REQUIRE(m >= 0.0);
    REQUIRE(m <= (u - t) * (1 + 1e-12));
  }
}
