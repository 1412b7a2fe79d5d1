#pragma once

// Self-contained SVG charts of experiment tables: x-axis N, y-axis cost.
// Circles are means across instances, vertical bars one sample standard
// deviation, polylines the theory values. Series colors:
//   global minimum black, random search gray, selection and crossover red,
//   offspring mean blue, n-parent mixture green.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xover/evt.hpp"
#include "xover/experiment.hpp"
#include "xover/stats.hpp"

namespace xover {

enum class PlotKind { fig2, fig3 };

namespace detail {

struct SeriesPoint {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;  // zero for a single instance
  std::optional<double> theory;
};

struct Series {
  std::string name;
  std::string color;
  std::vector<SeriesPoint> points;
};

struct SeriesSpec {
  std::string name;
  std::string color;
  std::vector<std::string> algorithms;
  std::optional<double> ExperimentRow::*value;
  // Theory value for a row; defaults to theory_mean.
  std::optional<double> (*theory)(const ExperimentRow&) = nullptr;
};

inline Series collect(const ExperimentTable& table, const SeriesSpec& spec) {
  std::map<int, std::vector<double>> values;
  std::map<int, std::optional<double>> theory;
  for (const auto& r : table) {
    if (std::find(spec.algorithms.begin(), spec.algorithms.end(), r.algorithm) == spec.algorithms.end()) continue;
    const auto& v = r.*spec.value;
    if (!v) continue;
    values[r.n_dims].push_back(*v);
    if (!theory.count(r.n_dims)) theory[r.n_dims] = spec.theory ? spec.theory(r) : r.theory_mean;
  }
  Series s{spec.name, spec.color, {}};
  for (const auto& [n, vs] : values) {
    const auto stats = summarize(vs);
    s.points.push_back({n, stats.mean(), vs.size() > 1 ? stats.stddev() : 0.0, theory[n]});
  }
  return s;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Frame {
  double x0, y0, width, height;  // pixel box of the plotting area
  double n_lo, n_hi, f_lo, f_hi;

  double px(double n) const { return x0 + (n - n_lo) / (n_hi - n_lo) * width; }
  double py(double f) const { return y0 + (f_hi - f) / (f_hi - f_lo) * height; }
};

inline Frame make_frame(const std::vector<Series>& series, double x0, double y0, double width, double height) {
  double n_lo = 1e300, n_hi = -1e300, f_lo = 1e300, f_hi = -1e300;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      n_lo = std::min(n_lo, double(p.n));
      n_hi = std::max(n_hi, double(p.n));
      f_lo = std::min({f_lo, p.mean - p.sd, p.theory.value_or(p.mean)});
      f_hi = std::max({f_hi, p.mean + p.sd, p.theory.value_or(p.mean)});
    }
  }
  if (n_hi - n_lo < 1.0) {
    n_lo -= 1.0;
    n_hi += 1.0;
  }
  const double pad = std::max(0.1, 0.08 * (f_hi - f_lo));
  return {x0, y0, width, height, n_lo, n_hi, f_lo - pad, f_hi + pad};
}

inline void draw_axes(std::string& out, const Frame& fr, const std::string& title, const std::string& ylabel) {
  out += "<rect x=\"" + fmt(fr.x0) + "\" y=\"" + fmt(fr.y0) + "\" width=\"" + fmt(fr.width) + "\" height=\"" +
         fmt(fr.height) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  out += "<text x=\"" + fmt(fr.x0 + fr.width / 2) + "\" y=\"" + fmt(fr.y0 - 10) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  out += "<text x=\"" + fmt(fr.x0 + fr.width / 2) + "\" y=\"" + fmt(fr.y0 + fr.height + 38) +
         "\" text-anchor=\"middle\" font-size=\"12\">N</text>\n";
  out += "<text x=\"" + fmt(fr.x0 - 45) + "\" y=\"" + fmt(fr.y0 + fr.height / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " + fmt(fr.x0 - 45) + " " +
         fmt(fr.y0 + fr.height / 2) + ")\">" + ylabel + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double n = fr.n_lo + (fr.n_hi - fr.n_lo) * t / 4.0;
    const double f = fr.f_lo + (fr.f_hi - fr.f_lo) * t / 4.0;
    out += "<text x=\"" + fmt(fr.px(n)) + "\" y=\"" + fmt(fr.y0 + fr.height + 18) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + fmt(n) + "</text>\n";
    out += "<text x=\"" + fmt(fr.x0 - 6) + "\" y=\"" + fmt(fr.py(f) + 3) +
           "\" text-anchor=\"end\" font-size=\"10\">" + fmt(f) + "</text>\n";
  }
}

inline void draw_series(std::string& out, const Frame& fr, const Series& s) {
  std::string theory;
  for (const auto& p : s.points) {
    const double x = fr.px(p.n);
    out += "<line class=\"bar\" x1=\"" + fmt(x) + "\" y1=\"" + fmt(fr.py(p.mean - p.sd)) + "\" x2=\"" + fmt(x) +
           "\" y2=\"" + fmt(fr.py(p.mean + p.sd)) + "\" stroke=\"" + s.color + "\"/>\n";
    out += "<circle class=\"point\" cx=\"" + fmt(x) + "\" cy=\"" + fmt(fr.py(p.mean)) + "\" r=\"4\" fill=\"none\" stroke=\"" +
           s.color + "\"><title>" + s.name + " N=" + std::to_string(p.n) + " mean=" + fmt(p.mean) +
           " sd=" + fmt(p.sd) + "</title></circle>\n";
    if (p.theory) theory += (theory.empty() ? "" : " ") + fmt(x) + "," + fmt(fr.py(*p.theory));
  }
  if (!theory.empty())
    out += "<polyline class=\"theory\" points=\"" + theory + "\" fill=\"none\" stroke=\"" + s.color + "\"/>\n";
}

inline void draw_legend(std::string& out, const std::vector<Series>& series, double x, double y) {
  for (const auto& s : series) {
    out += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" + s.color +
           "\"/>\n<text x=\"" + fmt(x + 15) + "\" y=\"" + fmt(y) + "\" font-size=\"11\">" + s.name + "</text>\n";
    y += 16;
  }
}

inline void draw_panel(std::string& out, const std::vector<Series>& series, double x0, double y0,
                       const std::string& title, const std::string& ylabel) {
  std::vector<Series> present;
  for (const auto& s : series)
    if (!s.points.empty()) present.push_back(s);
  if (present.empty()) return;
  const Frame fr = make_frame(present, x0, y0, 420, 300);
  draw_axes(out, fr, title, ylabel);
  for (const auto& s : present) draw_series(out, fr, s);
  draw_legend(out, present, x0 + 430, y0 + 12);
}

inline std::optional<double> offspring_variance_theory(const ExperimentRow& r) {
  return 1.0 - eta(r.n_dims, uniform_order_variance(r.n_dims, r.max_order));
}

}  // namespace detail

/// Renders a table as an SVG document. Output depends only on the table.
inline std::string emit_plot(const ExperimentTable& table, PlotKind kind) {
  if (table.empty()) throw std::invalid_argument("emit_plot: empty table");
  using detail::collect;
  const std::string header =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" ";
  std::string out;
  if (kind == PlotKind::fig2) {
    const std::vector<detail::Series> series{
        collect(table, {"global minimum", "#000000", {label::kExhaustive, label::kDescentReference},
                        &ExperimentRow::best_value}),
        collect(table, {"random search", "#808080", {label::kRandom}, &ExperimentRow::best_value}),
        collect(table, {"selection and crossover", "#d62728", {label::kCrossover}, &ExperimentRow::best_value}),
        collect(table, {"offspring mean", "#1f77b4", {label::kOffspring}, &ExperimentRow::offspring_mean}),
    };
    out = header + "width=\"700\" height=\"400\" viewBox=\"0 0 700 400\">\n";
    out += "<rect width=\"700\" height=\"400\" fill=\"#fff\"/>\n";
    detail::draw_panel(out, series, 70, 40, "K = " + std::to_string(table.front().max_order), "F");
  } else {
    const std::vector<detail::Series> best{
        collect(table, {"global minimum", "#000000", {label::kExhaustive, label::kDescentReference},
                        &ExperimentRow::best_value}),
        collect(table, {"selection and crossover", "#d62728", {label::kCrossover}, &ExperimentRow::best_value}),
        collect(table, {"mixture", "#2ca02c", {label::kMeanField}, &ExperimentRow::best_value}),
    };
    const std::vector<detail::Series> variance{
        collect(table, {"selection and crossover", "#d62728", {label::kCrossover}, &ExperimentRow::offspring_variance,
                        detail::offspring_variance_theory}),
        collect(table, {"mixture", "#2ca02c", {label::kMeanField}, &ExperimentRow::offspring_variance,
                        [](const ExperimentRow&) { return std::optional<double>{}; }}),
    };
    out = header + "width=\"700\" height=\"800\" viewBox=\"0 0 700 800\">\n";
    out += "<rect width=\"700\" height=\"800\" fill=\"#fff\"/>\n";
    detail::draw_panel(out, best, 70, 40, "(A) best cost", "F");
    detail::draw_panel(out, variance, 70, 440, "(B) offspring variance", "Var[F]");
  }
  out += "</svg>\n";
  return out;
}

inline void write_plot(const std::string& path, const ExperimentTable& table, PlotKind kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << emit_plot(table, kind);
}

}  // namespace xover
