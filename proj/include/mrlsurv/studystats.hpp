#pragma once

// Paired statistics for pre/post interpretation studies: McNemar's test,
// Wilcoxon signed-rank test and percentile-bootstrap intervals for accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mrlsurv/error.hpp"
#include "mrlsurv/quantile.hpp"
#include "mrlsurv/rng.hpp"

namespace mrlsurv {

struct PairedBinary {
  std::size_t b = 0;  // correct -> incorrect
  std::size_t c = 0;  // incorrect -> correct
  std::size_t n_concordant = 0;
};

// Tallies transitions from paired 0/1 outcomes.
inline PairedBinary tally_pairs(std::span<const int> before, std::span<const int> after) {
  if (before.size() != after.size()) throw DomainError("paired outcomes differ in length");
  PairedBinary p;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const bool x = before[i] != 0, y = after[i] != 0;
    if (x && !y) ++p.b;
    else if (!x && y) ++p.c;
    else ++p.n_concordant;
  }
  return p;
}

enum class McnemarMethod { continuity_corrected, exact };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi_square_1df_upper(double x) { return std::erfc(std::sqrt(x / 2.0)); }

// P(X <= k) for X ~ Binomial(n, 1/2), summed in log space.
inline double binomial_half_cdf(std::size_t k, std::size_t n) {
  double total = 0.0;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  for (std::size_t i = 0; i <= std::min(k, n); ++i) {
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                              std::lgamma(static_cast<double>(i) + 1.0) -
                              std::lgamma(static_cast<double>(n - i) + 1.0);
    total += std::exp(log_choose + log_half_n);
  }
  return std::min(total, 1.0);
}

// continuity_corrected: (|b - c| - 1)^2 / (b + c) against chi-square(1).
// exact: 2 P(X <= min(b, c)), X ~ Binomial(b + c, 1/2), capped at 1; the
// statistic reported is min(b, c).
inline TestResult mcnemar_test(const PairedBinary& pairs,
                               McnemarMethod method = McnemarMethod::continuity_corrected) {
  const std::size_t discordant = pairs.b + pairs.c;
  if (discordant == 0) throw EstimationError("no discordant pairs");
  TestResult r;
  if (method == McnemarMethod::continuity_corrected) {
    const double diff = std::abs(static_cast<double>(pairs.b) - static_cast<double>(pairs.c)) - 1.0;
    r.statistic = diff * diff / static_cast<double>(discordant);
    r.p_value = chi_square_1df_upper(r.statistic);
  } else {
    const std::size_t k = std::min(pairs.b, pairs.c);
    r.statistic = static_cast<double>(k);
    r.p_value = std::min(1.0, 2.0 * binomial_half_cdf(k, discordant));
  }
  return r;
}

struct WilcoxonResult {
  double w_plus = 0.0;  // sum of ranks of positive differences
  double p_value = 1.0; // two-sided
  std::size_t n_nonzero = 0;
  bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;

// Signed-rank test on paired differences. Zeros are dropped, tied |d| share
// the average rank. Exact null distribution up to 25 nonzero differences,
// tie-corrected normal approximation with continuity correction beyond.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> d;
  for (const double x : differences) {
    if (!std::isfinite(x)) throw DomainError("differences must be finite");
    if (x != 0.0) d.push_back(x);
  }
  if (d.empty()) throw EstimationError("no nonzero differences");
  const std::size_t n = d.size();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  // Doubled ranks stay integral under averaging.
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(d[idx[j]]) == std::abs(d[idx[i]])) ++j;
    const std::uint64_t r2 = static_cast<std::uint64_t>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) rank2[idx[k]] = r2;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  std::uint64_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) w2 += rank2[i];

  WilcoxonResult r;
  r.w_plus = static_cast<double>(w2) / 2.0;
  r.n_nonzero = n;
  if (n <= kWilcoxonExactLimit) {
    const std::uint64_t total2 = static_cast<std::uint64_t>(n) * (n + 1);
    std::vector<std::uint64_t> count(total2 + 1, 0);
    count[0] = 1;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += rank2[i];
      for (std::uint64_t s = reach; s >= rank2[i]; --s) {
        count[s] += count[s - rank2[i]];
        if (s == rank2[i]) break;
      }
    }
    std::uint64_t le = 0, ge = 0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= w2) le += count[s];
      if (s >= w2) ge += count[s];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    r.p_value = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / patterns);
    r.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return r;
}

// Per-participant scores, e.g. proportion correct.
struct ScoreVector {
  std::vector<std::string> ids;
  std::vector<double> scores;

  void validate() const {
    if (scores.empty()) throw DomainError("score vector is empty");
    if (!ids.empty() && ids.size() != scores.size()) {
      throw DomainError("score vector ids and scores differ in length");
    }
    for (const double s : scores)
      if (!std::isfinite(s)) throw DomainError("scores must be finite");
  }
};

// Matches participants by id (or by position when ids are absent) and tests
// after - before.
inline WilcoxonResult wilcoxon_signed_rank(const ScoreVector& before, const ScoreVector& after) {
  before.validate();
  after.validate();
  if (before.scores.size() != after.scores.size()) {
    throw DomainError("paired score vectors differ in length");
  }
  std::vector<double> diffs(before.scores.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    std::size_t j = i;
    if (!before.ids.empty() && !after.ids.empty()) {
      const auto it = std::find(after.ids.begin(), after.ids.end(), before.ids[i]);
      if (it == after.ids.end()) throw DomainError("participant '" + before.ids[i] + "' unpaired");
      j = static_cast<std::size_t>(it - after.ids.begin());
    }
    diffs[i] = after.scores[j] - before.scores[i];
  }
  return wilcoxon_signed_rank(diffs);
}

struct BootstrapOptions {
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  double lower_quantile = 0.025;
  double upper_quantile = 0.975;
};

struct ProportionCi {
  double estimate = 0.0;  // mean score, as a proportion
  double lower = 0.0;
  double upper = 0.0;
};

inline double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Percentile bootstrap over participants. Replicate b resamples with
// replicate_rng(seed, b).
inline ProportionCi bootstrap_proportion_ci(const ScoreVector& scores,
                                            const BootstrapOptions& opts = {}) {
  scores.validate();
  if (opts.replicates == 0) throw DomainError("need at least one bootstrap replicate");
  if (!(opts.lower_quantile >= 0.0 && opts.lower_quantile <= opts.upper_quantile &&
        opts.upper_quantile <= 1.0)) {
    throw DomainError("bootstrap quantiles must satisfy 0 <= lower <= upper <= 1");
  }
  const auto& x = scores.scores;
  const std::size_t n = x.size();
  std::vector<double> means(opts.replicates);
  std::vector<double> resample(n);
  for (std::size_t rep = 0; rep < opts.replicates; ++rep) {
    Rng rng = replicate_rng(opts.seed, rep);
    for (auto& v : resample) v = x[static_cast<std::size_t>(uniform_index(rng, n))];
    means[rep] = mean_of(resample);
  }
  std::sort(means.begin(), means.end());
  return {mean_of(x), quantile_sorted(means, opts.lower_quantile),
          quantile_sorted(means, opts.upper_quantile)};
}

}  // namespace mrlsurv
