#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "prefrec/common.hpp"
#include "prefrec/csv.hpp"
#include "prefrec/stats.hpp"

namespace prefrec {

// One polyline in a chart, with an optional shaded lo..hi band.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;
  std::vector<double> hi;
};

namespace detail {

inline std::string fmt_coord(double v) {
  std::array<char, 48> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, 2);
  if (res.ec != std::errc()) throw NumericError("plot: cannot format coordinate");
  return std::string(buf.data(), res.ptr);
}

inline std::string fmt_tick(double v) {
  std::array<char, 48> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 5);
  if (res.ec != std::errc()) throw NumericError("plot: cannot format tick");
  return std::string(buf.data(), res.ptr);
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

inline const char* series_color(std::size_t i) {
  static constexpr std::array<const char*, 8> palette = {
      "#4363d8", "#e6194b", "#3cb44b", "#f58231",
      "#911eb4", "#0082c8", "#800000", "#808000"};
  return palette[i % palette.size()];
}

}  // namespace detail

// Renders a fixed-layout line chart. Coordinates are formatted with fixed
// precision so the bytes are reproducible.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<PlotSeries>& series) {
  if (series.empty()) throw DataError("plot: chart \"" + title + "\" has no series");
  const double width = 960, height = 540;
  const double ml = 78, mr = 190, mt = 52, mb = 58;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) throw DataError("plot: series \"" + s.label + "\" is ragged");
    if (!s.lo.empty() && (s.lo.size() != s.x.size() || s.hi.size() != s.x.size()))
      throw DataError("plot: band of series \"" + s.label + "\" is ragged");
    if (s.x.empty()) throw DataError("plot: series \"" + s.label + "\" is empty");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double lo = s.lo.empty() ? s.y[i] : s.lo[i];
      const double hi = s.hi.empty() ? s.y[i] : s.hi[i];
      if (first) {
        xmin = xmax = s.x[i];
        ymin = lo;
        ymax = hi;
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, lo);
        ymax = std::max(ymax, hi);
      }
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  const double ypad = ymax == ymin ? (ymax == 0 ? 1.0 : std::abs(ymax) * 0.1) : (ymax - ymin) * 0.05;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"540\" "
         "viewBox=\"0 0 960 540\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"480\" y=\"28\" text-anchor=\"middle\" font-size=\"17\" fill=\"#222222\">" +
         detail::xml_escape(title) + "</text>\n";

  // Grid and ticks: five divisions on each axis.
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const std::string gx = detail::fmt_coord(px(fx));
    const std::string gy = detail::fmt_coord(py(fy));
    svg += "<line x1=\"" + detail::fmt_coord(ml) + "\" y1=\"" + gy + "\" x2=\"" +
           detail::fmt_coord(ml + pw) + "\" y2=\"" + gy + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::fmt_coord(ml - 8) + "\" y=\"" + gy +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-size=\"12\" "
           "fill=\"#444444\">" + detail::fmt_tick(fy) + "</text>\n";
    svg += "<text x=\"" + gx + "\" y=\"" + detail::fmt_coord(mt + ph + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#444444\">" +
           detail::fmt_tick(fx) + "</text>\n";
  }
  // Axes.
  svg += "<line x1=\"" + detail::fmt_coord(ml) + "\" y1=\"" + detail::fmt_coord(mt) + "\" x2=\"" +
         detail::fmt_coord(ml) + "\" y2=\"" + detail::fmt_coord(mt + ph) +
         "\" stroke=\"#444444\"/>\n";
  svg += "<line x1=\"" + detail::fmt_coord(ml) + "\" y1=\"" + detail::fmt_coord(mt + ph) +
         "\" x2=\"" + detail::fmt_coord(ml + pw) + "\" y2=\"" + detail::fmt_coord(mt + ph) +
         "\" stroke=\"#444444\"/>\n";
  svg += "<text x=\"" + detail::fmt_coord(ml + pw / 2) + "\" y=\"" +
         detail::fmt_coord(height - 14) + "\" text-anchor=\"middle\" font-size=\"13\" "
         "fill=\"#222222\">" + detail::xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + detail::fmt_coord(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" fill=\"#222222\" transform=\"rotate(-90 20 " +
         detail::fmt_coord(mt + ph / 2) + ")\">" + detail::xml_escape(y_label) + "</text>\n";

  // Bands under the lines.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    if (s.lo.empty()) continue;
    std::string d = "M";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      d += " " + detail::fmt_coord(px(s.x[i])) + "," + detail::fmt_coord(py(s.hi[i]));
    for (std::size_t i = s.x.size(); i-- > 0;)
      d += " " + detail::fmt_coord(px(s.x[i])) + "," + detail::fmt_coord(py(s.lo[i]));
    d += " Z";
    svg += "<path d=\"" + d + "\" fill=\"" + detail::series_color(si) +
           "\" fill-opacity=\"0.14\" stroke=\"none\"/>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i > 0) pts += " ";
      pts += detail::fmt_coord(px(s.x[i])) + "," + detail::fmt_coord(py(s.y[i]));
    }
    if (s.x.size() == 1) {
      svg += "<circle cx=\"" + detail::fmt_coord(px(s.x[0])) + "\" cy=\"" +
             detail::fmt_coord(py(s.y[0])) + "\" r=\"3\" fill=\"" + detail::series_color(si) +
             "\"/>\n";
    } else {
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             detail::series_color(si) + "\" stroke-width=\"1.8\"/>\n";
    }
  }

  // Legend, right gutter.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = mt + 12 + 22.0 * static_cast<double>(si);
    svg += "<line x1=\"" + detail::fmt_coord(ml + pw + 14) + "\" y1=\"" + detail::fmt_coord(ly) +
           "\" x2=\"" + detail::fmt_coord(ml + pw + 38) + "\" y2=\"" + detail::fmt_coord(ly) +
           "\" stroke=\"" + detail::series_color(si) + "\" stroke-width=\"2.2\"/>\n";
    svg += "<text x=\"" + detail::fmt_coord(ml + pw + 44) + "\" y=\"" + detail::fmt_coord(ly + 4) +
           "\" font-size=\"12\" fill=\"#222222\">" + detail::xml_escape(series[si].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("plot: cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw DataError("plot: write failed: " + path);
}

// day-ordered per-seed value sequences for one policy, validated rectangular
using SeedSeries = std::map<std::int64_t, std::vector<std::pair<double, double>>>;  // seed -> (day, v)

inline std::vector<PlotSeries> mean_cumulative_series(
    std::map<std::string, SeedSeries>& by_policy) {
  std::vector<PlotSeries> out;
  for (auto& [policy, seeds] : by_policy) {
    PlotSeries s;
    s.label = policy;
    bool first = true;
    for (auto& [seed, pts] : seeds) {
      std::sort(pts.begin(), pts.end());
      if (first) {
        s.x.reserve(pts.size());
        s.y.assign(pts.size(), 0.0);
        for (const auto& p : pts) s.x.push_back(p.first);
        first = false;
      } else if (pts.size() != s.x.size()) {
        throw DataError("plots: series \"" + policy + "\" is ragged across seeds");
      }
      double cum = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].first != s.x[i])
          throw DataError("plots: series \"" + policy + "\" has mismatched days across seeds");
        cum += pts[i].second;
        s.y[i] += cum;
      }
    }
    const double n = static_cast<double>(seeds.size());
    for (double& v : s.y) v /= n;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// Reads trajectory.csv and accuracy.csv from `dir` and writes the three
// standard figures next to them: mean cumulative clicks per policy, mean
// cumulative normalized clicks per policy, and model accuracy over time
// (mean with a +/- one-sample-std band; the history-sized static baseline
// appears as a horizontal reference line).
inline std::vector<std::string> emit_plots(const std::string& dir) {
  const CsvTable traj = read_csv(dir + "/trajectory.csv");
  if (traj.rows.empty()) throw DataError("plots: " + traj.path + " has no data rows");
  const std::size_t t_seed = traj.col("seed");
  const std::size_t t_policy = traj.col("policy");
  const std::size_t t_day = traj.col("day");
  const std::size_t t_clicks = traj.col("clicks");
  const std::size_t t_best = traj.col("best_clicks");
  const std::size_t t_worst = traj.col("worst_clicks");

  std::map<std::string, detail::SeedSeries> clicks_by_policy, norm_by_policy;
  for (const auto& row : traj.rows) {
    const std::int64_t seed = parse_csv_int(traj, row, t_seed);
    const std::string& policy = row[t_policy];
    const double day = static_cast<double>(parse_csv_int(traj, row, t_day));
    const double clicks = static_cast<double>(parse_csv_int(traj, row, t_clicks));
    const double best = static_cast<double>(parse_csv_int(traj, row, t_best));
    const double worst = static_cast<double>(parse_csv_int(traj, row, t_worst));
    const double norm = best == worst ? 1.0 : (clicks - worst) / (best - worst);
    clicks_by_policy[policy][seed].push_back({day, clicks});
    norm_by_policy[policy][seed].push_back({day, norm});
  }

  const std::vector<PlotSeries> clicks_series = detail::mean_cumulative_series(clicks_by_policy);
  const std::vector<PlotSeries> norm_series = detail::mean_cumulative_series(norm_by_policy);

  // Accuracy: mean +/- sample std across seeds at each evaluation day.
  const CsvTable acc = read_csv(dir + "/accuracy.csv");
  if (acc.rows.empty())
    throw DataError("plots: " + acc.path + " has no data rows (no model-tracking policy was run)");
  const std::size_t a_policy = acc.col("policy");
  const std::size_t a_day = acc.col("day");
  const std::size_t a_acc = acc.col("accuracy");
  std::map<std::string, std::map<double, std::vector<double>>> acc_by_policy;  // policy -> day -> values
  for (const auto& row : acc.rows) {
    const double day = static_cast<double>(parse_csv_int(acc, row, a_day));
    const double a = parse_csv_double(acc, row, a_acc);
    if (std::isnan(a)) continue;  // baseline replicate whose sample had no pairs
    acc_by_policy[row[a_policy]][day].push_back(a);
  }

  // Horizontal reference lines need the span of the day axis.
  double day_min = 0.0, day_max = 1.0;
  bool have_days = false;
  for (const auto& [policy, days] : acc_by_policy) {
    if (days.size() < 2) continue;
    const double lo = days.begin()->first, hi = days.rbegin()->first;
    day_min = have_days ? std::min(day_min, lo) : lo;
    day_max = have_days ? std::max(day_max, hi) : hi;
    have_days = true;
  }

  std::vector<PlotSeries> acc_series;
  for (const auto& [policy, days] : acc_by_policy) {
    PlotSeries s;
    s.label = policy;
    auto push_point = [&](double x, const std::vector<double>& vals) {
      std::vector<double> v = vals;
      const double m = mean_of(v);
      const double sd = sample_std(v);
      s.x.push_back(x);
      s.y.push_back(m);
      s.lo.push_back(m - sd);
      s.hi.push_back(m + sd);
    };
    if (days.size() == 1 && have_days) {
      // Single evaluation day (the static baseline): draw it across the axis.
      push_point(day_min, days.begin()->second);
      push_point(day_max, days.begin()->second);
    } else {
      for (const auto& [day, vals] : days) push_point(day, vals);
    }
    acc_series.push_back(std::move(s));
  }
  if (acc_series.empty())
    throw DataError("plots: " + acc.path + " has no finite accuracy values");

  const std::vector<std::string> paths = {dir + "/cumulative_clicks.svg",
                                          dir + "/cumulative_normalized_clicks.svg",
                                          dir + "/accuracy_over_time.svg"};
  detail::write_text_file(
      paths[0], render_line_chart("Cumulative clicks by selection policy", "day",
                                  "cumulative clicks (mean over seeds)", clicks_series));
  detail::write_text_file(
      paths[1],
      render_line_chart("Cumulative normalized clicks by selection policy", "day",
                        "cumulative normalized clicks (mean over seeds)", norm_series));
  detail::write_text_file(
      paths[2], render_line_chart("Pairwise ranking accuracy over time", "day",
                                  "test pair accuracy (mean \xC2\xB1 std)", acc_series));
  return paths;
}

}  // namespace prefrec
