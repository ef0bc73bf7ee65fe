#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hcpinn/errors.hpp"

// Self-contained SVG plots: line charts and log-scale bar charts, enough to
// eyeball a solution overlay or a residual profile without any plotting
// dependency. Numeric artifacts (CSV/JSON) are the source of truth; these
// files are presentation only.

namespace hcpinn::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb4";
};

namespace detail {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 48.0, kBottom = 52.0;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double a, double b) const {
    const double t = (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

inline Range padded(double lo, double hi) {
  if (!(lo < hi)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

inline void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";
}

inline void axes(std::ostream& out, const Range& rx, const Range& ry,
                 const std::string& xlabel, const std::string& ylabel,
                 bool log_y) {
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
      << "\" y2=\"" << y0 << "\" stroke=\"#333\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
      << "\" y2=\"" << y1 << "\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double px = rx.map(fx, x0, x1);
    out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px
        << "\" y2=\"" << y0 + 4 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << y0 + 17
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    const double py = ry.map(fy, y0, y1);
    out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << py << "\" x2=\"" << x0
        << "\" y2=\"" << py << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << x0 - 7 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">"
        << (log_y ? "1e" + num(fy) : num(fy)) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << (y0 + y1) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
  out << "</g>\n";
}

}  // namespace detail

// Overlaid line series. With log_y the y values are plotted as log10 of
// their absolute value, floored far below any meaningful residual.
inline void write_line_plot(std::ostream& out, const std::string& title,
                            const std::string& xlabel,
                            const std::string& ylabel,
                            const std::vector<Series>& series,
                            bool log_y = false) {
  using namespace detail;
  if (series.empty()) throw ConfigError("plot needs at least one series");
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  bool seen = false;
  const auto transform = [&](double v) {
    return log_y ? std::log10(std::max(std::abs(v), 1e-18)) : v;
  };
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw ConfigError("series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double ty = transform(s.y[i]);
      if (!seen) {
        xlo = xhi = s.x[i];
        ylo = yhi = ty;
        seen = true;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, ty);
      yhi = std::max(yhi, ty);
    }
  }
  const Range rx = padded(xlo, xhi), ry = padded(ylo, yhi);
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;

  header(out, title);
  axes(out, rx, ry, xlabel, ylabel, log_y);
  double legend_y = kTop + 6.0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << num(rx.map(s.x[i], x0, x1)) << ","
          << num(ry.map(transform(s.y[i]), y0, y1)) << " ";
    }
    out << "\"/>\n";
    out << "<rect x=\"" << x1 - 150 << "\" y=\"" << legend_y - 9
        << "\" width=\"18\" height=\"4\" fill=\"" << s.color << "\"/>\n"
        << "<text x=\"" << x1 - 126 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
        << "</text>\n";
    legend_y += 16.0;
  }
  out << "</svg>\n";
}

inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel,
                            const std::string& ylabel,
                            const std::vector<Series>& series,
                            bool log_y = false) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot file '" + path + "'");
  write_line_plot(out, title, xlabel, ylabel, series, log_y);
}

// Log-scale bars, one per labeled magnitude (constraint residual maxima).
inline void write_bar_chart(std::ostream& out, const std::string& title,
                            const std::vector<std::string>& labels,
                            const std::vector<double>& values) {
  using namespace detail;
  if (labels.size() != values.size() || labels.empty())
    throw ConfigError("bar chart needs matching nonempty labels and values");
  double lo = 0.0, hi = -18.0;
  std::vector<double> logs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    logs[i] = std::log10(std::max(std::abs(values[i]), 1e-18));
    lo = std::min(lo, logs[i]);
    hi = std::max(hi, logs[i]);
  }
  const Range ry = padded(std::floor(lo) - 1.0, std::ceil(hi) + 1.0);
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  const double slot = (x1 - x0) / static_cast<double>(values.size());

  header(out, title);
  axes(out, Range{0.0, static_cast<double>(values.size())}, ry, "", "log10 |r|",
       true);
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cx = x0 + slot * (static_cast<double>(i) + 0.5);
    const double top = ry.map(logs[i], y0, y1);
    const double base = ry.map(ry.lo, y0, y1);
    out << "<rect x=\"" << cx - 0.3 * slot << "\" y=\"" << std::min(top, base)
        << "\" width=\"" << 0.6 * slot << "\" height=\""
        << std::abs(base - top) << "\" fill=\"#1f6fb4\"/>\n";
    char val[32];
    std::snprintf(val, sizeof val, "%.2e", values[i]);
    out << "<text x=\"" << cx << "\" y=\"" << top - 5
        << "\" text-anchor=\"middle\">" << val << "</text>\n";
    out << "<text x=\"" << cx << "\" y=\"" << y0 + 30
        << "\" text-anchor=\"middle\" transform=\"rotate(-18 " << cx << " "
        << y0 + 30 << ")\">" << labels[i] << "</text>\n";
  }
  out << "</g>\n</svg>\n";
}

inline void write_bar_chart(const std::string& path, const std::string& title,
                            const std::vector<std::string>& labels,
                            const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot file '" + path + "'");
  write_bar_chart(out, title, labels, values);
}

}  // namespace hcpinn::svg
