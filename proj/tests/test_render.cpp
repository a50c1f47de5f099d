#include <catch2/catch_amalgamated.hpp>

#include <regex>

#include "mrlsurv/compare.hpp"
#include "mrlsurv/render.hpp"
#include "support/simulate.hpp"

using namespace mrlsurv;
using Catch::Matchers::WithinAbs;

namespace {

SurvivalSample worked_sample() {
  const std::vector<double> t{1, 2, 3, 4};
  const std::vector<int> e{1, 1, 0, 1};
  return SurvivalSample(t, e);
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::string series_d(const std::string& svg) {
  static const std::regex re("<path class=\"series\" d=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  return m[1];
}

}  // namespace

TEST_CASE("plot spec validation", "[render]") {
  PlotSpec spec;
  CHECK_THROWS_WITH(render_plot_svg(spec), "nothing to plot");

  const auto km = km_fit(worked_sample());
  spec.series.push_back(km_series(km, "A"));
  spec.envelope = EnvelopeBand{{0.0, 1.0}, {0.0}, {1.0, 1.0}};
  CHECK_THROWS_WITH(render_plot_svg(spec), "envelope grid mismatch");
}

TEST_CASE("KM series draws one vertical jump per event time", "[render]") {
  const auto km = km_fit(worked_sample());
  PlotSpec spec;
  spec.y_axis = YAxisMode::unit_interval;
  spec.series.push_back(km_series(km, "all"));
  const auto svg = render_plot_svg(spec);
  const auto d = series_d(svg);
  CHECK(count_of(d, " V") == 3);
  CHECK(d.find(" L") == std::string::npos);
  CHECK(count_of(svg, "class=\"censor\"") == 1);
  CHECK(svg.starts_with("<?xml"));
  CHECK(svg.ends_with("</svg>\n"));
  CHECK(render_plot_svg(spec) == svg);
}

TEST_CASE("pixel coordinates invert to data coordinates", "[render][property]") {
  const auto km = km_fit(mrlsurv::testing::exponential_sample(4, 60, 1.0, 0.3));
  PlotSpec spec;
  spec.y_axis = YAxisMode::unit_interval;
  spec.series.push_back(km_series(km, "all"));
  const auto tr = plot_transform(spec);
  const auto d = series_d(render_plot_svg(spec));

  // walk the path, recovering each vertex
  std::istringstream in(d);
  std::string tok;
  double x = 0, y = 0;
  std::vector<std::pair<double, double>> vertices;
  while (in >> tok) {
    if (tok[0] == 'M') {
      const auto comma = tok.find(',');
      x = std::stod(tok.substr(1, comma - 1));
      y = std::stod(tok.substr(comma + 1));
    } else if (tok[0] == 'H') {
      x = std::stod(tok.substr(1));
    } else if (tok[0] == 'V') {
      y = std::stod(tok.substr(1));
      vertices.emplace_back(x, y);
    }
  }
  const auto knots = km.survival.knots();
  const auto values = km.survival.values();
  REQUIRE(vertices.size() == knots.size());
  const double px_per_x = tr.plot_width / (tr.x_max - tr.x_min);
  const double px_per_y = tr.plot_height / (tr.y_max - tr.y_min);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    CHECK(std::abs(tr.data_x(vertices[i].first) - knots[i]) * px_per_x <= 0.5);
    CHECK(std::abs(tr.data_y(vertices[i].second) - values[i]) * px_per_y <= 0.5);
  }
}

TEST_CASE("envelope band and reference line", "[render]") {
  const auto a = mrlsurv::testing::exponential_sample(1, 40, 0.5, 0.0, "A");
  const auto b = mrlsurv::testing::exponential_sample(2, 40, 1.0, 0.0, "B");
  const auto diff = survival_difference(km_fit(a), km_fit(b));
  const auto env = permutation_envelope(a, b, ComparisonKind::surv_diff, diff.grid, {50, 9});
  PlotSpec spec;
  spec.y_axis = YAxisMode::symmetric;
  spec.reference_line = 0.0;
  spec.series.push_back(comparison_series(diff, "A - B"));
  spec.envelope = envelope_band(env);
  const auto svg = render_plot_svg(spec);
  CHECK(count_of(svg, "class=\"envelope\"") == 1);
  CHECK(count_of(svg, "class=\"reference\"") == 1);
  const auto tr = plot_transform(spec);
  CHECK(tr.y_min == -tr.y_max);
}

TEST_CASE("tick positions are exact multiples of the step", "[render]") {
  const auto ticks = detail::nice_ticks(0.0, 1.0);
  REQUIRE(ticks.size() == 6);
  for (std::size_t k = 0; k < ticks.size(); ++k) CHECK(ticks[k] == 0.2 * static_cast<double>(k));
  const auto sym = detail::nice_ticks(-1.05, 1.05);
  CHECK(std::find(sym.begin(), sym.end(), 0.0) != sym.end());
}

TEST_CASE("KM curve CSV", "[render][csv]") {
  const auto csv = export_curve_csv(km_fit(worked_sample()));
  CHECK(csv == "t,value\n1,0.75\n2,0.5\n4,0\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("MRL CSV components add up to the value", "[render][csv]") {
  const auto sample = mrlsurv::testing::exponential_sample(8, 400, 1.0);
  const auto curve = fit_hybrid_mrl(sample);
  const auto table = parse_curve_csv(export_curve_csv(curve));
  REQUIRE(table.columns == std::vector<std::string>{"t", "value", "component_km", "component_tail"});
  REQUIRE(table.rows.size() == curve.grid.size());
  for (const auto& row : table.rows) {
    CHECK_THAT(row[2] + row[3], WithinAbs(row[1], 1e-12 * std::max(1.0, row[1])));
  }
}

TEST_CASE("curve CSV round-trips exactly", "[render][csv][property]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = mrlsurv::testing::exponential_sample(seed, 25, 1.0, 0.5, "A");
    const auto b = mrlsurv::testing::exponential_sample(seed + 100, 25, 1.3, 0.5, "B");
    const auto ratio = survival_ratio(km_fit(a), km_fit(b));
    const auto env = permutation_envelope(a, b, ComparisonKind::surv_ratio, ratio.grid, {20, seed});
    const auto table = curve_table(ratio, &env);
    const auto back = parse_curve_csv(write_csv(table));
    REQUIRE(back.columns == table.columns);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (std::size_t c = 0; c < table.rows[i].size(); ++c) {
        const double x = table.rows[i][c], y = back.rows[i][c];
        REQUIRE(((std::isnan(x) && std::isnan(y)) || x == y));
      }
    }
  }
}

TEST_CASE("CSV export errors", "[render][csv]") {
  CHECK_THROWS_WITH(write_csv(CurveTable{{"t", "value"}, {}}), "empty curve");
  const auto diff = survival_difference(km_fit(worked_sample()), km_fit(worked_sample()));
  Envelope env;
  env.grid = {0.5};
  CHECK_THROWS_WITH(curve_table(diff, &env), "envelope grid mismatch");
  CHECK_THROWS_AS(parse_curve_csv("t,value\n1,abc\n"), ParseError);
}

TEST_CASE("grouped CSV adds a group column", "[render][csv]") {
  const std::vector<std::pair<std::string, CurveTable>> tables{
      {"A", curve_table(km_fit(worked_sample()))}, {"B, late", curve_table(km_fit(worked_sample()))}};
  const auto csv = write_csv(tables);
  CHECK(csv.starts_with("group,t,value\nA,1,0.75\n"));
  CHECK(csv.find("\"B, late\",4,0\n") != std::string::npos);
}
