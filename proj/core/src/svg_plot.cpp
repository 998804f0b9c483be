#include "cier/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cier::metrics {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string svg_line_plot(std::span<const PlotSeries> series, const PlotOptions& options) {
  const double left = 60, right = 20, top = 40, bottom = 50;
  const double w = options.width - left - right;
  const double h = options.height - top - bottom;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t longest = 1;
  for (const PlotSeries& s : series) {
    longest = std::max(longest, s.values.size());
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi == lo) hi = lo + 1.0;

  auto x_of = [&](std::size_t i) { return left + (longest > 1 ? w * static_cast<double>(i) / static_cast<double>(longest - 1) : 0.0); };
  auto y_of = [&](double v) { return top + h * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape(options.title) << "</text>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + h) << "\" x2=\"" << fmt(left + w) << "\" y2=\""
      << fmt(top + h) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(top + h)
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt(left + w / 2) << "\" y=\"" << fmt(top + h + 36)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">episode</text>\n";
  out << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(top + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << fmt(hi) << "</text>\n";
  out << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(top + h)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << fmt(lo) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) out << ' ';
      out << fmt(x_of(i)) << ',' << fmt(y_of(s.values[i]));
    }
    out << "\"><title>" << escape(s.name) << "</title></polyline>\n";
    out << "<text x=\"" << fmt(left + w - 4) << "\" y=\"" << fmt(top + 14 + 14 * static_cast<double>(k))
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" fill=\"" << colour << "\">"
        << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace cier::metrics
