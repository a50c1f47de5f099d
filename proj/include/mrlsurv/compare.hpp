#pragma once

// Two-group comparison curves and their permutation reference envelopes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mrlsurv/dataset.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/km.hpp"
#include "mrlsurv/mrl.hpp"
#include "mrlsurv/quantile.hpp"
#include "mrlsurv/rng.hpp"

namespace mrlsurv {

enum class ComparisonKind { surv_diff, surv_ratio, mrl_diff };

inline std::string_view to_string(ComparisonKind kind) {
  switch (kind) {
    case ComparisonKind::surv_diff: return "surv_diff";
    case ComparisonKind::surv_ratio: return "surv_ratio";
    case ComparisonKind::mrl_diff: return "mrl_diff";
  }
  return "unknown";
}

struct ComparisonCurve {
  ComparisonKind kind = ComparisonKind::surv_diff;
  std::string group_a = "A";
  std::string group_b = "B";
  std::vector<double> grid;
  std::vector<double> values;
  double window_end = 0.0;  // end of the common follow-up (or MRL) window
};

namespace detail {

inline void check_grid(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw DomainError("grid points must be finite and >= 0");
    }
    if (i > 0 && !(grid[i - 1] < grid[i])) throw DomainError("grid must be strictly increasing");
  }
}

// Union of both event-time sets, cut at the shorter follow-up.
inline std::vector<double> common_event_grid(const KmCurve& a, const KmCurve& b,
                                             double window_end) {
  std::vector<double> grid;
  std::set_union(a.event_times.begin(), a.event_times.end(), b.event_times.begin(),
                 b.event_times.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::upper_bound(grid.begin(), grid.end(), window_end), grid.end());
  return grid;
}

inline std::vector<double> candidate_grid(const KmCurve& a, const KmCurve& b,
                                          std::span<const double> requested) {
  if (!requested.empty()) {
    check_grid(requested);
    return {requested.begin(), requested.end()};
  }
  auto grid = common_event_grid(a, b, std::min(a.max_time, b.max_time));
  if (grid.empty()) throw EstimationError("no common follow-up window");
  return grid;
}

}  // namespace detail

// S_A(t) - S_B(t). Explicit grids are used as given; the default grid is the
// union of event times up to min(max follow-up of A, max follow-up of B).
inline ComparisonCurve survival_difference(const KmCurve& a, const KmCurve& b,
                                           std::span<const double> grid = {}) {
  ComparisonCurve out;
  out.kind = ComparisonKind::surv_diff;
  out.window_end = std::min(a.max_time, b.max_time);
  out.grid = detail::candidate_grid(a, b, grid);
  out.values.reserve(out.grid.size());
  for (const double t : out.grid) out.values.push_back(a.survival(t) - b.survival(t));
  return out;
}

// S_A(t) / S_B(t), restricted to grid points where S_B(t) > 0.
inline ComparisonCurve survival_ratio(const KmCurve& a, const KmCurve& b,
                                      std::span<const double> grid = {}) {
  ComparisonCurve out;
  out.kind = ComparisonKind::surv_ratio;
  out.window_end = std::min(a.max_time, b.max_time);
  for (const double t : detail::candidate_grid(a, b, grid)) {
    const double sb = b.survival(t);
    if (sb > 0.0) {
      out.grid.push_back(t);
      out.values.push_back(a.survival(t) / sb);
    }
  }
  if (out.grid.empty()) throw EstimationError("ratio undefined: denominator survival is zero");
  return out;
}

// m_A(t) - m_B(t) on the union of both grids inside the common domain
// [max(first grid points), min(thresholds)], each MRL re-evaluated at every
// common point.
inline ComparisonCurve mrl_difference(const MrlCurve& a, const MrlCurve& b) {
  if (a.grid.empty() || b.grid.empty()) throw EstimationError("no overlapping MRL domain");
  const double lo = std::max(a.grid.front(), b.grid.front());
  const double hi = std::min(a.threshold, b.threshold);
  if (lo > hi) throw EstimationError("no overlapping MRL domain");

  ComparisonCurve out;
  out.kind = ComparisonKind::mrl_diff;
  out.window_end = hi;
  std::set_union(a.grid.begin(), a.grid.end(), b.grid.begin(), b.grid.end(),
                 std::back_inserter(out.grid));
  out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());
  std::erase_if(out.grid, [&](double t) { return t < lo || t > hi; });
  if (out.grid.empty()) throw EstimationError("no overlapping MRL domain");

  out.values.reserve(out.grid.size());
  for (const double t : out.grid) out.values.push_back(mrl_at(a, t).value - mrl_at(b, t).value);
  return out;
}

struct EnvelopeOptions {
  std::size_t permutations = 1000;
  std::uint64_t seed = 0;
  double lower_quantile = 0.025;
  double upper_quantile = 0.975;
  unsigned threads = 1;  // replicates are split across this many workers
};

struct Envelope {
  std::vector<double> grid;
  std::vector<double> lower;  // NaN where no replicate was defined
  std::vector<double> upper;
  std::vector<std::size_t> defined_count;  // replicates contributing per point
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  double lower_quantile = 0.025;
  double upper_quantile = 0.975;
};

namespace detail {

inline double comparison_value(ComparisonKind kind, double sa, double sb) {
  if (kind == ComparisonKind::surv_diff) return sa - sb;
  return sb > 0.0 ? sa / sb : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// Pointwise band of the comparison curve under random relabelings of the
// pooled subjects (group sizes preserved). Replicate b uses the stream
// replicate_rng(seed, b), so the result does not depend on `threads`.
// An empty grid means the observed curve's default grid.
inline Envelope permutation_envelope(const SurvivalSample& a, const SurvivalSample& b,
                                     ComparisonKind kind, std::span<const double> grid,
                                     const EnvelopeOptions& opts) {
  if (opts.permutations == 0) throw DomainError("need at least one permutation");
  if (kind == ComparisonKind::mrl_diff) {
    throw DomainError("permutation envelopes support surv_diff and surv_ratio only");
  }
  if (a.size() + b.size() < 4) throw DomainError("permutation envelope needs at least 4 subjects");
  if (!(opts.lower_quantile >= 0.0 && opts.lower_quantile < opts.upper_quantile &&
        opts.upper_quantile <= 1.0)) {
    throw DomainError("band quantiles must satisfy 0 <= lower < upper <= 1");
  }

  Envelope env;
  env.n_permutations = opts.permutations;
  env.seed = opts.seed;
  env.lower_quantile = opts.lower_quantile;
  env.upper_quantile = opts.upper_quantile;
  if (grid.empty()) {
    const auto ka = km_fit(a), kb = km_fit(b);
    env.grid = kind == ComparisonKind::surv_diff ? survival_difference(ka, kb).grid
                                                 : survival_ratio(ka, kb).grid;
  } else {
    detail::check_grid(grid);
    env.grid.assign(grid.begin(), grid.end());
  }

  std::vector<Observation> pooled(a.observations().begin(), a.observations().end());
  pooled.insert(pooled.end(), b.observations().begin(), b.observations().end());
  std::stable_sort(pooled.begin(), pooled.end(), observation_before);
  const std::size_t n = pooled.size();
  const std::size_t n_a = a.size();
  const std::size_t points = env.grid.size();

  // replicate-major table of curve values
  std::vector<double> table(opts.permutations * points);
  auto run_replicate = [&](std::size_t rep) {
    Rng rng = replicate_rng(opts.seed, rep);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    std::vector<char> in_a(n, 0);
    for (std::size_t k = 0; k < n_a; ++k) in_a[order[k]] = 1;
    std::vector<Observation> obs_a, obs_b;
    obs_a.reserve(n_a);
    obs_b.reserve(n - n_a);
    for (std::size_t i = 0; i < n; ++i) (in_a[i] ? obs_a : obs_b).push_back(pooled[i]);
    const auto ka = km_fit(SurvivalSample(std::move(obs_a)));
    const auto kb = km_fit(SurvivalSample(std::move(obs_b)));
    double* row = table.data() + rep * points;
    for (std::size_t i = 0; i < points; ++i) {
      row[i] = detail::comparison_value(kind, ka.survival(env.grid[i]), kb.survival(env.grid[i]));
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::size_t>(opts.threads, 1, opts.permutations));
  if (workers == 1) {
    for (std::size_t rep = 0; rep < opts.permutations; ++rep) run_replicate(rep);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t rep = w; rep < opts.permutations; rep += workers) run_replicate(rep);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  env.lower.resize(points);
  env.upper.resize(points);
  env.defined_count.resize(points);
  std::vector<double> column;
  for (std::size_t i = 0; i < points; ++i) {
    column.clear();
    for (std::size_t rep = 0; rep < opts.permutations; ++rep) {
      const double v = table[rep * points + i];
      if (!std::isnan(v)) column.push_back(v);
    }
    env.defined_count[i] = column.size();
    if (column.empty()) {
      env.lower[i] = env.upper[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(column.begin(), column.end());
    env.lower[i] = quantile_sorted(column, opts.lower_quantile);
    env.upper[i] = quantile_sorted(column, opts.upper_quantile);
  }
  return env;
}

}  // namespace mrlsurv
