#pragma once

// Pre/post interpretation-study summaries from `participant,item,pre,post`
// response files.

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrlsurv/detail/text.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/rng.hpp"
#include "mrlsurv/studystats.hpp"

namespace mrlsurv {

struct Response {
  std::string participant;
  std::string item;
  int pre = 0;   // 1 = correct
  int post = 0;
};

inline std::vector<Response> load_responses(std::istream& in) {
  std::string line;
  std::optional<std::map<std::string, std::size_t, std::less<>>> cols;
  std::vector<Response> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (!cols && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (detail::trim(view).empty()) continue;
    if (view.back() == '\r') view.remove_suffix(1);
    const auto fields = detail::split_csv_line(view);
    if (!cols) {
      if (!fields) throw DataError("schema error: malformed header");
      cols.emplace();
      for (std::size_t i = 0; i < fields->size(); ++i) {
        const std::string name(detail::trim((*fields)[i]));
        if (name != "participant" && name != "item" && name != "pre" && name != "post") {
          throw DataError("schema error: unknown column '" + name + "'");
        }
        if (!cols->emplace(name, i).second) {
          throw DataError("schema error: duplicate column '" + name + "'");
        }
      }
      for (const char* required : {"participant", "item", "pre", "post"}) {
        if (!cols->contains(required)) {
          throw DataError(std::string("schema error: missing required column '") + required + "'");
        }
      }
      continue;
    }
    ++row;
    if (!fields || fields->size() != cols->size()) throw ParseError(row, "wrong field count");
    auto field = [&](std::string_view name) {
      return std::string(detail::trim((*fields)[cols->find(name)->second]));
    };
    auto flag = [&](std::string_view name) {
      const auto v = field(name);
      if (v == "1") return 1;
      if (v == "0") return 0;
      throw ParseError(row, std::string(name) + " '" + v + "' is not 0 or 1");
    };
    Response r{field("participant"), field("item"), flag("pre"), flag("post")};
    if (r.participant.empty() || r.item.empty()) {
      throw ParseError(row, "participant and item must be non-empty");
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw DataError("empty dataset");
  return out;
}

inline std::vector<Response> load_responses(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_responses(in);
}

inline constexpr double kNotAvailable = std::numeric_limits<double>::quiet_NaN();

struct StudyRow {
  std::string scope;  // item label or "overall"
  std::size_t n = 0;  // participants
  ProportionCi pre{kNotAvailable, kNotAvailable, kNotAvailable};
  ProportionCi post{kNotAvailable, kNotAvailable, kNotAvailable};
  PairedBinary pairs;
  TestResult mcnemar{kNotAvailable, kNotAvailable};
  double wilcoxon_w = kNotAvailable;
  double wilcoxon_p = kNotAvailable;
};

struct StudyOptions {
  McnemarMethod mcnemar = McnemarMethod::continuity_corrected;
  BootstrapOptions bootstrap{};  // replicates == 0 skips the intervals
};

// One row per item (McNemar on that item's pairs) and an "overall" row built
// from per-participant mean accuracy (Wilcoxon on the per-participant change).
inline std::vector<StudyRow> summarize_study(const std::vector<Response>& responses,
                                             const StudyOptions& opts = {}) {
  // item -> participant -> (pre, post)
  std::map<std::string, std::map<std::string, std::pair<int, int>>> by_item;
  std::map<std::string, std::pair<double, double>> sums;  // participant -> (pre, post)
  std::map<std::string, std::size_t> counts;
  for (const auto& r : responses) {
    if (!by_item[r.item].emplace(r.participant, std::pair{r.pre, r.post}).second) {
      throw DataError("participant '" + r.participant + "' answered item '" + r.item +
                      "' more than once");
    }
    sums[r.participant].first += r.pre;
    sums[r.participant].second += r.post;
    ++counts[r.participant];
  }

  std::vector<StudyRow> rows;
  std::uint64_t scope_index = 0;
  auto fill = [&](StudyRow& row, const ScoreVector& pre, const ScoreVector& post) {
    row.n = pre.scores.size();
    if (opts.bootstrap.replicates > 0) {
      auto b = opts.bootstrap;
      b.seed = replicate_seed(opts.bootstrap.seed, 2 * scope_index);
      row.pre = bootstrap_proportion_ci(pre, b);
      b.seed = replicate_seed(opts.bootstrap.seed, 2 * scope_index + 1);
      row.post = bootstrap_proportion_ci(post, b);
    } else {
      row.pre.estimate = mean_of(pre.scores);
      row.post.estimate = mean_of(post.scores);
    }
    try {
      const auto w = wilcoxon_signed_rank(pre, post);
      row.wilcoxon_w = w.w_plus;
      row.wilcoxon_p = w.p_value;
    } catch (const EstimationError&) {
    }
    ++scope_index;
  };

  for (const auto& [item, answers] : by_item) {
    StudyRow row;
    row.scope = item;
    ScoreVector pre, post;
    std::vector<int> pre_flags, post_flags;
    for (const auto& [participant, pp] : answers) {
      pre.ids.push_back(participant);
      post.ids.push_back(participant);
      pre.scores.push_back(pp.first);
      post.scores.push_back(pp.second);
      pre_flags.push_back(pp.first);
      post_flags.push_back(pp.second);
    }
    row.pairs = tally_pairs(pre_flags, post_flags);
    if (row.pairs.b + row.pairs.c > 0) row.mcnemar = mcnemar_test(row.pairs, opts.mcnemar);
    fill(row, pre, post);
    rows.push_back(std::move(row));
  }

  StudyRow overall;
  overall.scope = "overall";
  ScoreVector pre, post;
  for (const auto& [participant, s] : sums) {
    const double k = static_cast<double>(counts[participant]);
    pre.ids.push_back(participant);
    post.ids.push_back(participant);
    pre.scores.push_back(s.first / k);
    post.scores.push_back(s.second / k);
  }
  fill(overall, pre, post);
  rows.push_back(std::move(overall));
  return rows;
}

inline std::string study_summary_csv(const std::vector<StudyRow>& rows) {
  std::string out =
      "scope,n,pre_acc,pre_lo,pre_hi,post_acc,post_lo,post_hi,mcnemar_b,mcnemar_c,"
      "mcnemar_stat,mcnemar_p,wilcoxon_w,wilcoxon_p\n";
  using detail::format_exact;
  for (const auto& r : rows) {
    const bool item = r.scope != "overall";
    out += detail::quote_csv_field(r.scope) + "," + std::to_string(r.n);
    for (const double v : {r.pre.estimate, r.pre.lower, r.pre.upper, r.post.estimate,
                           r.post.lower, r.post.upper}) {
      out += "," + format_exact(v);
    }
    out += "," + (item ? std::to_string(r.pairs.b) : std::string("nan"));
    out += "," + (item ? std::to_string(r.pairs.c) : std::string("nan"));
    for (const double v : {r.mcnemar.statistic, r.mcnemar.p_value, r.wilcoxon_w, r.wilcoxon_p}) {
      out += "," + format_exact(v);
    }
    out += '\n';
  }
  return out;
}

// Human-readable table, accuracies as percentages.
inline std::string study_summary_text(const std::vector<StudyRow>& rows) {
  auto pct = [](double v) { return std::isnan(v) ? std::string("-") : detail::format_sig(100 * v, 3) + "%"; };
  auto ci = [&](const ProportionCi& c) {
    return pct(c.estimate) + (std::isnan(c.lower) ? "" : " [" + pct(c.lower) + " - " + pct(c.upper) + "]");
  };
  auto num = [](double v) { return std::isnan(v) ? std::string("-") : detail::format_sig(v, 4); };
  std::string out;
  for (const auto& r : rows) {
    out += r.scope + " (n=" + std::to_string(r.n) + "): pre " + ci(r.pre) + ", post " +
           ci(r.post) + "; McNemar p=" + num(r.mcnemar.p_value) + "; Wilcoxon p=" +
           num(r.wilcoxon_p) + "\n";
  }
  return out;
}

}  // namespace mrlsurv
