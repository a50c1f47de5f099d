#pragma once

// Command-line driver: km, mrl, diff, ratio, mrl-diff and stats subcommands.
// Exit codes: 0 success, 1 data or estimation error, 2 bad flags.

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mrlsurv/compare.hpp"
#include "mrlsurv/dataset.hpp"
#include "mrlsurv/detail/text.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/km.hpp"
#include "mrlsurv/mrl.hpp"
#include "mrlsurv/render.hpp"
#include "mrlsurv/study_summary.hpp"
#include "mrlsurv/studystats.hpp"

namespace mrlsurv {

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string out_svg;
  std::string out_csv;
  std::vector<std::string> groups;
  std::optional<double> threshold;
  double threshold_quantile = 0.8;
  std::size_t min_exceedances = 10;
  std::optional<std::size_t> permutations;  // subcommand default when unset
  std::optional<std::uint64_t> seed;
  std::vector<double> band{0.025, 0.975};
  std::vector<double> grid;
  std::size_t bootstrap = 2000;
  std::string mcnemar = "corrected";
  unsigned threads = 1;
};

// Flag-grammar violation discovered after CLI11 parsing; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    const auto v = parse_double(item);
    if (!v || !std::isfinite(*v)) throw UsageError(flag + ": '" + item + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write output file '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing output file '" + path + "'");
}

inline std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out.push_back(sep);
    out += s;
  }
  return out;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (const double x : v) parts.push_back(format_sig(x, 10));
  return join(parts);
}

inline const SurvivalSample& pick(const GroupedSamples& data, const std::string& group) {
  const auto it = data.find(group);
  if (it == data.end()) throw DataError("unknown group '" + group + "'");
  return it->second;
}

inline std::vector<std::string> resolve_groups(const GroupedSamples& data,
                                               const std::vector<std::string>& requested,
                                               bool exactly_two) {
  std::vector<std::string> groups = requested;
  if (groups.empty()) {
    for (const auto& [g, s] : data) groups.push_back(g);
  }
  for (const auto& g : groups) pick(data, g);
  if (exactly_two && groups.size() != 2) {
    throw DataError("comparison needs exactly two groups (found " + std::to_string(groups.size()) +
                    "); use --groups A,B");
  }
  return groups;
}

inline ThresholdConfig threshold_config(const RunConfig& cfg) {
  ThresholdConfig t = ThresholdConfig::at_quantile(cfg.threshold_quantile, cfg.min_exceedances);
  if (cfg.threshold) {
    t.mode = ThresholdConfig::Mode::explicit_value;
    t.explicit_value = *cfg.threshold;
  }
  return t;
}

inline std::string threshold_summary(const RunConfig& cfg) {
  std::string s = cfg.threshold ? "threshold=" + format_sig(*cfg.threshold, 10)
                                : "threshold_quantile=" + format_sig(cfg.threshold_quantile, 10);
  s += " min_exceedances=" + std::to_string(cfg.min_exceedances);
  if (!cfg.grid.empty()) s += " grid=" + join_numbers(cfg.grid);
  return s;
}

inline std::string fit_summary(const std::string& group, const MrlCurve& c) {
  return group + ": u=" + format_sig(c.threshold, 6) + " xi=" + format_sig(c.gpd.shape, 6) +
         " sigma=" + format_sig(c.gpd.scale, 6) + " m=" + std::to_string(c.gpd.n_exceedances) +
         " converged=" + (c.gpd.converged ? "yes" : "no") +
         " mrl_u=" + format_sig(c.mrl_at_threshold, 6) +
         " grid_size=" + std::to_string(c.grid.size());
}

inline void warn_fit(std::ostream& err, const std::string& group, const MrlCurve& c) {
  if (!c.gpd.converged) {
    err << "warning: GPD fit for group '" << group << "' did not meet the stopping tolerance\n";
  }
  if (c.gpd.at_lower_bound) {
    err << "warning: GPD shape for group '" << group << "' is at its lower bound "
        << format_sig(c.gpd.shape, 6) << "\n";
  }
}

inline void emit(const RunConfig& cfg, const PlotSpec* spec, const std::string* csv) {
  if (!cfg.out_svg.empty() && spec) write_file(cfg.out_svg, render_plot_svg(*spec));
  if (!cfg.out_csv.empty() && csv) write_file(cfg.out_csv, *csv);
}

inline std::string run_km(const RunConfig& cfg, const GroupedSamples& data) {
  const auto groups = resolve_groups(data, cfg.groups, false);
  PlotSpec spec;
  spec.title = "Kaplan-Meier survival";
  spec.y_label = "Survival probability";
  spec.y_axis = YAxisMode::unit_interval;
  std::vector<std::pair<std::string, CurveTable>> tables;
  std::string summary = "km input=" + cfg.input + " groups=" + join(groups);
  for (const auto& g : groups) {
    const auto curve = km_fit(pick(data, g));
    spec.series.push_back(km_series(curve, g));
    tables.emplace_back(g, curve_table(curve));
    summary += " | " + g + ": n=" + std::to_string(curve.sample_size) +
               " event_times=" + std::to_string(curve.event_times.size()) +
               " censored=" + std::to_string(curve.censor_marks.size());
  }
  std::string csv;
  if (!cfg.out_csv.empty()) csv = tables.size() == 1 ? write_csv(tables.front().second) : write_csv(tables);
  emit(cfg, &spec, &csv);
  return summary;
}

inline std::string run_mrl(const RunConfig& cfg, const GroupedSamples& data, std::ostream& err) {
  const auto groups = resolve_groups(data, cfg.groups, false);
  const auto tcfg = threshold_config(cfg);
  PlotSpec spec;
  spec.title = "Mean residual life";
  spec.y_label = "Mean residual life";
  spec.y_axis = YAxisMode::from_zero;
  std::vector<std::pair<std::string, CurveTable>> tables;
  std::string summary = "mrl input=" + cfg.input + " groups=" + join(groups) + " " +
                        threshold_summary(cfg);
  for (const auto& g : groups) {
    const auto curve = fit_hybrid_mrl(pick(data, g), tcfg, cfg.grid);
    warn_fit(err, g, curve);
    spec.series.push_back(mrl_series(curve, g));
    tables.emplace_back(g, curve_table(curve));
    summary += " | " + fit_summary(g, curve);
  }
  std::string csv;
  if (!cfg.out_csv.empty()) csv = tables.size() == 1 ? write_csv(tables.front().second) : write_csv(tables);
  emit(cfg, &spec, &csv);
  return summary;
}

inline std::string run_survival_comparison(const RunConfig& cfg, const GroupedSamples& data,
                                           ComparisonKind kind) {
  const auto groups = resolve_groups(data, cfg.groups, true);
  const auto& a = pick(data, groups[0]);
  const auto& b = pick(data, groups[1]);
  const auto ka = km_fit(a), kb = km_fit(b);
  auto curve = kind == ComparisonKind::surv_diff ? survival_difference(ka, kb, cfg.grid)
                                                 : survival_ratio(ka, kb, cfg.grid);
  curve.group_a = groups[0];
  curve.group_b = groups[1];
  const std::size_t permutations = cfg.permutations.value_or(1000);

  const bool diff = kind == ComparisonKind::surv_diff;
  PlotSpec spec;
  spec.title = diff ? "Difference in survival (" + groups[0] + " - " + groups[1] + ")"
                    : "Survival ratio (" + groups[0] + " / " + groups[1] + ")";
  spec.y_label = diff ? "Survival difference" : "Survival ratio";
  spec.y_axis = diff ? YAxisMode::symmetric : YAxisMode::automatic;
  spec.reference_line = diff ? 0.0 : 1.0;
  spec.series.push_back(comparison_series(curve, groups[0] + " vs " + groups[1]));

  std::string summary = std::string(diff ? "diff" : "ratio") + " input=" + cfg.input +
                        " groups=" + join(groups) + " permutations=" + std::to_string(permutations);
  std::string csv;
  if (permutations > 0) {
    EnvelopeOptions eo;
    eo.permutations = permutations;
    eo.seed = *cfg.seed;
    eo.lower_quantile = cfg.band[0];
    eo.upper_quantile = cfg.band[1];
    eo.threads = cfg.threads;
    const auto env = permutation_envelope(a, b, kind, curve.grid, eo);
    spec.envelope = envelope_band(env);
    if (!cfg.out_csv.empty()) csv = export_curve_csv(curve, env);
    summary += " seed=" + std::to_string(*cfg.seed) + " band=" + join_numbers(cfg.band);
  } else if (!cfg.out_csv.empty()) {
    csv = export_curve_csv(curve);
  }
  if (!cfg.grid.empty()) summary += " grid=" + join_numbers(cfg.grid);
  summary += " window_end=" + format_sig(curve.window_end, 6) +
             " grid_size=" + std::to_string(curve.grid.size());
  emit(cfg, &spec, &csv);
  return summary;
}

inline std::string run_mrl_diff(const RunConfig& cfg, const GroupedSamples& data,
                                std::ostream& err) {
  const auto groups = resolve_groups(data, cfg.groups, true);
  const auto tcfg = threshold_config(cfg);
  const auto ma = fit_hybrid_mrl(pick(data, groups[0]), tcfg);
  const auto mb = fit_hybrid_mrl(pick(data, groups[1]), tcfg);
  warn_fit(err, groups[0], ma);
  warn_fit(err, groups[1], mb);
  auto curve = mrl_difference(ma, mb);
  if (!cfg.grid.empty()) {
    // Explicit grid: re-evaluate both estimators at the requested points.
    detail::check_grid(cfg.grid);
    curve.grid.clear();
    curve.values.clear();
    for (const double t : cfg.grid) {
      curve.grid.push_back(t);
      curve.values.push_back(mrl_at(ma, t).value - mrl_at(mb, t).value);
    }
  }
  curve.group_a = groups[0];
  curve.group_b = groups[1];

  PlotSpec spec;
  spec.title = "Difference in mean residual life (" + groups[0] + " - " + groups[1] + ")";
  spec.y_label = "MRL difference";
  spec.y_axis = YAxisMode::symmetric;
  spec.reference_line = 0.0;
  spec.series.push_back(comparison_series(curve, groups[0] + " vs " + groups[1]));
  std::string csv;
  if (!cfg.out_csv.empty()) csv = export_curve_csv(curve);
  emit(cfg, &spec, &csv);
  return "mrl-diff input=" + cfg.input + " groups=" + join(groups) + " " + threshold_summary(cfg) +
         " | " + fit_summary(groups[0], ma) + " | " + fit_summary(groups[1], mb) +
         " | window_end=" + format_sig(curve.window_end, 6) +
         " grid_size=" + std::to_string(curve.grid.size());
}

inline std::string run_stats(const RunConfig& cfg, std::ostream& out) {
  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + cfg.input + "'");
  const auto responses = load_responses(in);
  StudyOptions opts;
  opts.mcnemar = cfg.mcnemar == "exact" ? McnemarMethod::exact : McnemarMethod::continuity_corrected;
  opts.bootstrap.replicates = cfg.bootstrap;
  opts.bootstrap.seed = cfg.seed.value_or(0);
  opts.bootstrap.lower_quantile = cfg.band[0];
  opts.bootstrap.upper_quantile = cfg.band[1];
  const auto rows = summarize_study(responses, opts);
  out << study_summary_text(rows);
  if (!cfg.out_csv.empty()) write_file(cfg.out_csv, study_summary_csv(rows));
  std::string summary = "stats input=" + cfg.input + " mcnemar=" + cfg.mcnemar +
                        " bootstrap=" + std::to_string(cfg.bootstrap);
  if (cfg.bootstrap > 0) {
    summary += " seed=" + std::to_string(*cfg.seed) + " band=" + join_numbers(cfg.band);
  }
  return summary + " rows=" + std::to_string(rows.size());
}

inline void validate_config(RunConfig& cfg, const std::string& band_text,
                            const std::string& grid_text, const std::string& groups_text) {
  if (!groups_text.empty()) cfg.groups = split_list(groups_text);
  if (!grid_text.empty()) cfg.grid = parse_number_list(grid_text, "--grid");
  if (!band_text.empty()) {
    cfg.band = parse_number_list(band_text, "--band");
    if (cfg.band.size() != 2 || !(cfg.band[0] >= 0.0 && cfg.band[0] < cfg.band[1] &&
                                  cfg.band[1] <= 1.0)) {
      throw UsageError("--band: expected two levels lo,hi with 0 <= lo < hi <= 1");
    }
  }
  const bool resampling =
      ((cfg.subcommand == "diff" || cfg.subcommand == "ratio") &&
       cfg.permutations.value_or(1000) > 0) ||
      (cfg.subcommand == "stats" && cfg.bootstrap > 0);
  if (resampling && !cfg.seed) {
    throw UsageError("--seed is required when permutations or bootstrap replicates are requested");
  }
  if (cfg.subcommand == "mrl-diff" && !cfg.groups.empty() && cfg.groups.size() != 2) {
    throw UsageError("mrl-diff requires exactly two groups");
  }
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Survival curves, mean residual life and paired study statistics", "mrlsurv"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string band_text, grid_text, groups_text;

  const auto open_unit = CLI::Validator(
      [](std::string& s) -> std::string {
        const auto v = detail::parse_double(s);
        if (!v || !(*v > 0.0 && *v < 1.0)) return "value must lie strictly between 0 and 1";
        return {};
      },
      "(0,1)");

  auto add_common = [&](CLI::App* sub, bool svg) {
    sub->add_option("--input", cfg.input, "Input CSV")->required();
    if (svg) sub->add_option("--out", cfg.out_svg, "Output SVG plot");
    sub->add_option("--out-csv", cfg.out_csv, "Output CSV");
  };
  auto add_threshold = [&](CLI::App* sub) {
    auto* t = sub->add_option("--threshold", cfg.threshold, "Explicit threshold u");
    auto* q = sub->add_option("--threshold-quantile", cfg.threshold_quantile,
                              "Quantile of uncensored times used as threshold")
                  ->check(open_unit);
    t->excludes(q);
    sub->add_option("--min-exceedances", cfg.min_exceedances, "Minimum observations above u")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
  };
  auto add_groups = [&](CLI::App* sub) {
    sub->add_option("--groups", groups_text, "Comma-separated group labels");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", grid_text, "Comma-separated evaluation times");
  };
  auto add_resampling = [&](CLI::App* sub) {
    sub->add_option("--permutations", cfg.permutations, "Permutations for the envelope (0: none)");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--band", band_text, "Envelope quantiles lo,hi");
    sub->add_option("--threads", cfg.threads, "Worker threads for envelope replicates")
        ->check(CLI::Range(1u, 256u));
  };

  auto* km = app.add_subcommand("km", "Kaplan-Meier curves");
  add_common(km, true);
  add_groups(km);
  auto* mrl = app.add_subcommand("mrl", "Hybrid mean residual life curves");
  add_common(mrl, true);
  add_groups(mrl);
  add_threshold(mrl);
  add_grid(mrl);
  auto* diff = app.add_subcommand("diff", "Survival difference with permutation envelope");
  auto* ratio = app.add_subcommand("ratio", "Survival ratio with permutation envelope");
  for (auto* sub : {diff, ratio}) {
    add_common(sub, true);
    add_groups(sub);
    add_grid(sub);
    add_resampling(sub);
  }
  auto* mrl_diff = app.add_subcommand("mrl-diff", "Difference in mean residual life");
  add_common(mrl_diff, true);
  add_groups(mrl_diff);
  add_threshold(mrl_diff);
  add_grid(mrl_diff);
  auto* stats = app.add_subcommand("stats", "Paired pre/post accuracy statistics");
  add_common(stats, false);
  stats->add_option("--bootstrap", cfg.bootstrap, "Bootstrap replicates (0: none)");
  stats->add_option("--seed", cfg.seed, "RNG seed");
  stats->add_option("--band", band_text, "Interval quantiles lo,hi");
  stats->add_option("--mcnemar", cfg.mcnemar, "McNemar variant")
      ->check(CLI::IsMember({"corrected", "exact"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    detail::validate_config(cfg, band_text, grid_text, groups_text);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    std::string summary;
    if (cfg.subcommand == "stats") {
      summary = detail::run_stats(cfg, out);
    } else {
      const auto data = load_dataset_file(cfg.input);
      if (cfg.subcommand == "km") summary = detail::run_km(cfg, data);
      else if (cfg.subcommand == "mrl") summary = detail::run_mrl(cfg, data, err);
      else if (cfg.subcommand == "diff")
        summary = detail::run_survival_comparison(cfg, data, ComparisonKind::surv_diff);
      else if (cfg.subcommand == "ratio")
        summary = detail::run_survival_comparison(cfg, data, ComparisonKind::surv_ratio);
      else summary = detail::run_mrl_diff(cfg, data, err);
    }
    out << summary << "\n";
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, out, err);
}

}  // namespace mrlsurv
