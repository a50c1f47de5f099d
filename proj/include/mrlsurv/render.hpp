#pragma once

// Deterministic SVG plots (KM, MRL, survival difference, MRL difference) and
// CSV export of every curve type.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrlsurv/compare.hpp"
#include "mrlsurv/detail/text.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/km.hpp"
#include "mrlsurv/mrl.hpp"

namespace mrlsurv {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool step = false;  // draw right-continuous: horizontal, then vertical jump
  std::optional<double> x_end;  // extend the last level of a step series to here
  std::vector<double> censor_x;
  std::vector<double> censor_y;
};

struct EnvelopeBand {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class YAxisMode { unit_interval, symmetric, from_zero, automatic };

struct PlotSpec {
  std::string title;
  std::string x_label = "Time";
  std::string y_label;
  int width = 720;
  int height = 480;
  std::vector<PlotSeries> series;
  bool show_censor_marks = true;
  std::optional<EnvelopeBand> envelope;
  std::optional<double> reference_line;
  YAxisMode y_axis = YAxisMode::automatic;
};

// Affine map from data space to SVG pixel space.
struct AxisTransform {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  double left = 0, top = 0, plot_width = 1, plot_height = 1;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * plot_width; }
  double py(double y) const { return top + (y_max - y) / (y_max - y_min) * plot_height; }
  double data_x(double px_) const { return x_min + (px_ - left) / plot_width * (x_max - x_min); }
  double data_y(double py_) const { return y_max - (py_ - top) / plot_height * (y_max - y_min); }
};

inline constexpr double kMarginLeft = 70, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

namespace detail {

inline void validate_spec(const PlotSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw DomainError("plot size must be positive");
  if (spec.series.empty()) throw DomainError("nothing to plot");
  for (const auto& s : spec.series) {
    if (s.x.empty() || s.x.size() != s.y.size()) throw DomainError("nothing to plot");
    if (s.censor_x.size() != s.censor_y.size()) {
      throw DomainError("censor marks need one y per x");
    }
  }
  if (spec.envelope) {
    const auto& e = *spec.envelope;
    if (e.grid.size() != e.lower.size() || e.grid.size() != e.upper.size() ||
        e.grid != spec.series.front().x) {
      throw DomainError("envelope grid mismatch");
    }
  }
}

inline std::string escape_xml(std::string_view s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

inline std::string coord(double v) { return format_sig(v, 6); }

}  // namespace detail

inline AxisTransform plot_transform(const PlotSpec& spec) {
  detail::validate_spec(spec);
  AxisTransform tr;
  tr.left = kMarginLeft;
  tr.top = kMarginTop;
  tr.plot_width = spec.width - kMarginLeft - kMarginRight;
  tr.plot_height = spec.height - kMarginTop - kMarginBottom;

  double x_hi = 0.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();
  auto take_y = [&](double v) {
    if (std::isfinite(v)) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  };
  for (const auto& s : spec.series) {
    for (const double v : s.x) x_hi = std::max(x_hi, v);
    if (s.x_end) x_hi = std::max(x_hi, *s.x_end);
    for (const double v : s.y) take_y(v);
  }
  if (spec.envelope) {
    for (const double v : spec.envelope->lower) take_y(v);
    for (const double v : spec.envelope->upper) take_y(v);
  }
  tr.x_min = 0.0;
  tr.x_max = x_hi > 0.0 ? x_hi * 1.05 : 1.0;

  const double ref = spec.reference_line.value_or(0.0);
  switch (spec.y_axis) {
    case YAxisMode::unit_interval:
      tr.y_min = 0.0;
      tr.y_max = 1.0;
      break;
    case YAxisMode::symmetric: {
      double half = 0.0;
      if (std::isfinite(y_lo)) half = std::max(std::abs(y_lo - ref), std::abs(y_hi - ref));
      half = half > 0.0 ? half * 1.05 : 1.0;
      tr.y_min = ref - half;
      tr.y_max = ref + half;
      break;
    }
    case YAxisMode::from_zero:
      tr.y_min = 0.0;
      tr.y_max = std::isfinite(y_hi) && y_hi > 0.0 ? y_hi * 1.05 : 1.0;
      break;
    case YAxisMode::automatic: {
      if (!std::isfinite(y_lo)) y_lo = y_hi = 0.0;
      const double pad = y_hi > y_lo ? (y_hi - y_lo) * 0.05 : 1.0;
      tr.y_min = y_lo - pad;
      tr.y_max = y_hi + pad;
      break;
    }
  }
  return tr;
}

namespace detail {

inline std::string series_path(const PlotSeries& s, const AxisTransform& tr) {
  std::string d = "M" + coord(tr.px(s.x[0])) + "," + coord(tr.py(s.y[0]));
  for (std::size_t i = 1; i < s.x.size(); ++i) {
    if (s.step) {
      d += " H" + coord(tr.px(s.x[i])) + " V" + coord(tr.py(s.y[i]));
    } else {
      d += " L" + coord(tr.px(s.x[i])) + "," + coord(tr.py(s.y[i]));
    }
  }
  if (s.step && s.x_end && *s.x_end > s.x.back()) d += " H" + coord(tr.px(*s.x_end));
  return d;
}

inline std::string band_path(const EnvelopeBand& e, bool step, const AxisTransform& tr) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < e.grid.size(); ++i)
    if (std::isfinite(e.lower[i]) && std::isfinite(e.upper[i])) keep.push_back(i);
  if (keep.empty()) return {};
  std::string d;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto i = keep[k];
    const auto x = coord(tr.px(e.grid[i])), y = coord(tr.py(e.upper[i]));
    if (k == 0) d = "M" + x + "," + y;
    else if (step) d += " H" + x + " V" + y;
    else d += " L" + x + "," + y;
  }
  for (std::size_t k = keep.size(); k-- > 0;) {
    const auto i = keep[k];
    const auto x = coord(tr.px(e.grid[i])), y = coord(tr.py(e.lower[i]));
    if (k + 1 == keep.size()) d += " L" + x + "," + y;
    else if (step) d += " V" + y + " H" + x;
    else d += " L" + x + "," + y;
  }
  return d + " Z";
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target + 1) break;
  }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step - 1e-9);
  for (int k = 0;; ++k) {
    const double t = (first + k) * step;
    if (t > hi + step * 1e-9) break;
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

inline constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

// Standalone SVG 1.1 document. Output depends only on `spec`.
inline std::string render_plot_svg(const PlotSpec& spec) {
  const AxisTransform tr = plot_transform(spec);
  using detail::coord;
  using detail::escape_xml;
  const std::string w = std::to_string(spec.width), h = std::to_string(spec.height);
  const double x0 = tr.left, x1 = tr.left + tr.plot_width;
  const double y0 = tr.top, y1 = tr.top + tr.plot_height;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << coord(spec.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(spec.title) << "</text>\n";

  svg << "<g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\" font-family=\"sans-serif\" "
         "font-size=\"11\">\n"
      << "<path d=\"M" << coord(x0) << ',' << coord(y0) << " V" << coord(y1) << " H" << coord(x1)
      << "\" fill=\"none\"/>\n";
  for (const double t : detail::nice_ticks(tr.x_min, tr.x_max)) {
    const auto x = coord(tr.px(t));
    svg << "<path d=\"M" << x << ',' << coord(y1) << " V" << coord(y1 + 5) << "\"/>"
        << "<text x=\"" << x << "\" y=\"" << coord(y1 + 18) << "\" text-anchor=\"middle\" "
        << "stroke=\"none\">" << detail::format_sig(t, 6) << "</text>\n";
  }
  for (const double t : detail::nice_ticks(tr.y_min, tr.y_max)) {
    const auto y = coord(tr.py(t));
    svg << "<path d=\"M" << coord(x0 - 5) << ',' << y << " H" << coord(x0) << "\"/>"
        << "<text x=\"" << coord(x0 - 8) << "\" y=\"" << coord(tr.py(t) + 4)
        << "\" text-anchor=\"end\" stroke=\"none\">" << detail::format_sig(t, 6) << "</text>\n";
  }
  svg << "<text x=\"" << coord((x0 + x1) / 2) << "\" y=\"" << coord(spec.height - 10.0)
      << "\" text-anchor=\"middle\" stroke=\"none\">" << escape_xml(spec.x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << coord((y0 + y1) / 2) << "\" text-anchor=\"middle\" "
      << "stroke=\"none\" transform=\"rotate(-90 16 " << coord((y0 + y1) / 2) << ")\">"
      << escape_xml(spec.y_label) << "</text>\n"
      << "</g>\n";

  if (spec.envelope) {
    const auto d = detail::band_path(*spec.envelope, spec.series.front().step, tr);
    if (!d.empty()) {
      svg << "<path class=\"envelope\" d=\"" << d
          << "\" fill=\"#bbbbbb\" fill-opacity=\"0.5\" stroke=\"none\"/>\n";
    }
  }
  if (spec.reference_line && *spec.reference_line >= tr.y_min &&
      *spec.reference_line <= tr.y_max) {
    const auto y = coord(tr.py(*spec.reference_line));
    svg << "<path class=\"reference\" d=\"M" << coord(x0) << ',' << y << " H" << coord(x1)
        << "\" stroke=\"#555555\" stroke-dasharray=\"4,3\" fill=\"none\"/>\n";
  }

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const auto color = detail::kPalette[k % std::size(detail::kPalette)];
    svg << "<path class=\"series\" d=\"" << detail::series_path(s, tr) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\" fill=\"none\"/>\n";
    if (spec.show_censor_marks && !s.censor_x.empty()) {
      std::string d;
      for (std::size_t i = 0; i < s.censor_x.size(); ++i) {
        const double py = tr.py(s.censor_y[i]);
        if (!d.empty()) d += ' ';
        d += "M" + coord(tr.px(s.censor_x[i])) + "," + coord(py - 4) + " v8";
      }
      svg << "<path class=\"censor\" d=\"" << d << "\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    }
    const double ly = tr.top + 14 + 16.0 * static_cast<double>(k);
    svg << "<path class=\"legend\" d=\"M" << coord(x1 - 150) << ',' << coord(ly - 4) << " h20\" "
        << "stroke=\"" << color << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << coord(x1 - 124) << "\" y=\"" << coord(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Series builders for the four plot types.

inline PlotSeries km_series(const KmCurve& curve, std::string label) {
  PlotSeries s;
  s.label = std::move(label);
  s.step = true;
  s.x.push_back(0.0);
  s.y.push_back(curve.survival.initial_value());
  const auto knots = curve.survival.knots();
  const auto values = curve.survival.values();
  s.x.insert(s.x.end(), knots.begin(), knots.end());
  s.y.insert(s.y.end(), values.begin(), values.end());
  s.x_end = curve.max_time;
  for (const double c : curve.censor_marks) {
    s.censor_x.push_back(c);
    s.censor_y.push_back(curve.survival(c));
  }
  return s;
}

inline PlotSeries mrl_series(const MrlCurve& curve, std::string label) {
  return {std::move(label), curve.grid, curve.values, false, std::nullopt, {}, {}};
}

inline PlotSeries comparison_series(const ComparisonCurve& curve, std::string label) {
  return {std::move(label), curve.grid, curve.values, curve.kind != ComparisonKind::mrl_diff,
          std::nullopt, {}, {}};
}

inline EnvelopeBand envelope_band(const Envelope& env) { return {env.grid, env.lower, env.upper}; }

// ---------------------------------------------------------------------------
// CSV export.

struct CurveTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline CurveTable curve_table(const KmCurve& curve) {
  CurveTable t{{"t", "value"}, {}};
  const auto knots = curve.survival.knots();
  const auto values = curve.survival.values();
  for (std::size_t i = 0; i < knots.size(); ++i) t.rows.push_back({knots[i], values[i]});
  return t;
}

inline CurveTable curve_table(const MrlCurve& curve) {
  CurveTable t{{"t", "value", "component_km", "component_tail"}, {}};
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    t.rows.push_back(
        {curve.grid[i], curve.values[i], curve.km_component[i], curve.tail_component[i]});
  }
  return t;
}

// With an envelope, adds lower/upper and the number of replicates defined at
// each point.
inline CurveTable curve_table(const ComparisonCurve& curve, const Envelope* envelope = nullptr) {
  CurveTable t{{"t", "value"}, {}};
  if (envelope) {
    if (envelope->grid != curve.grid) throw DomainError("envelope grid mismatch");
    t.columns.insert(t.columns.end(), {"lower", "upper", "n_defined"});
  }
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    std::vector<double> row{curve.grid[i], curve.values[i]};
    if (envelope) {
      row.insert(row.end(), {envelope->lower[i], envelope->upper[i],
                             static_cast<double>(envelope->defined_count[i])});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string write_csv(const CurveTable& table) {
  if (table.rows.empty()) throw DomainError("empty curve");
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += detail::format_exact(row[c]);
    }
    out += '\n';
  }
  return out;
}

// Several labelled curves in one file, with a leading `group` column.
inline std::string write_csv(std::span<const std::pair<std::string, CurveTable>> tables) {
  if (tables.empty()) throw DomainError("empty curve");
  std::string out = "group";
  for (const auto& col : tables.front().second.columns) out += "," + col;
  out += '\n';
  for (const auto& [label, table] : tables) {
    if (table.rows.empty()) throw DomainError("empty curve for group '" + label + "'");
    if (table.columns != tables.front().second.columns) {
      throw DomainError("grouped curves must share columns");
    }
    for (const auto& row : table.rows) {
      out += detail::quote_csv_field(label);
      for (const double v : row) out += "," + detail::format_exact(v);
      out += '\n';
    }
  }
  return out;
}

template <class Curve>
std::string export_curve_csv(const Curve& curve) {
  return write_csv(curve_table(curve));
}

inline std::string export_curve_csv(const ComparisonCurve& curve, const Envelope& envelope) {
  return write_csv(curve_table(curve, &envelope));
}

inline CurveTable parse_curve_csv(std::string_view text) {
  CurveTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(detail::trim(line));
    if (!fields) throw DataError("malformed curve CSV");
    if (header) {
      t.columns = *fields;
      header = false;
      continue;
    }
    ++row;
    if (fields->size() != t.columns.size()) throw ParseError(row, "wrong field count");
    std::vector<double> values;
    for (const auto& f : *fields) {
      const auto trimmed = detail::trim(f);
      if (trimmed == "nan") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = detail::parse_double(trimmed);
      if (!v) throw ParseError(row, "non-numeric field '" + f + "'");
      values.push_back(*v);
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

}  // namespace mrlsurv
