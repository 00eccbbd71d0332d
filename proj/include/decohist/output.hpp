#pragma once

// CSV and SVG writers. Numbers go through %.17g so that a rerun on the same
// machine reproduces every file byte for byte. Each file opens with a comment
// carrying the artifact version and the scenario hash.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decohist/errors.hpp"

namespace decohist {

inline std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const std::string& version, const std::string& hash, const std::vector<std::string>& columns) {
    os_ << "# " << version << " scenario " << hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
    width_ = columns.size();
  }
  CsvWriter& cell(double v) { return raw(fmt_number(v)); }
  CsvWriter& cell(long v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(bool v) { return raw(v ? "1" : "0"); }
  CsvWriter& raw(const std::string& s) {
    os_ << (col_ ? "," : "") << s;
    if (++col_ == width_) {
      os_ << "\n";
      col_ = 0;
    }
    return *this;
  }
  std::string str() const { return os_.str(); }

private:
  std::ostringstream os_;
  std::size_t width_ = 0, col_ = 0;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

namespace svg {

inline std::string header(const std::string& version, const std::string& hash, int w, int h) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- " << version << " scenario " << hash << " -->\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

/// Grey-to-dark-red ramp for t in [0, 1].
inline std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - 120 * t));
  const int g = static_cast<int>(std::lround(255 - 235 * t));
  const int b = static_cast<int>(std::lround(255 - 235 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

/// Square heatmap of values[a * n + b], labelled from first_label.
inline std::string heatmap(const std::string& version, const std::string& hash, const std::string& title,
                           const std::vector<double>& values, int n, int first_label) {
  const int cell = std::max(8, std::min(40, 560 / std::max(n, 1)));
  const int left = 60, top = 40, W = left + n * cell + 80, H = top + n * cell + 50;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  std::ostringstream os;
  os << header(version, hash, W, H);
  os << "<text x=\"" << left << "\" y=\"24\">" << title << "</text>\n";
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double v = values[static_cast<std::size_t>(a) * n + b];
      os << "<rect x=\"" << left + b * cell << "\" y=\"" << top + a * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << ramp(vmax > 0 ? v / vmax : 0.0) << "\"><title>"
         << first_label + a << "," << first_label + b << ": " << fmt_number(v) << "</title></rect>\n";
    }
  const int step = std::max(1, n / 10);
  for (int a = 0; a < n; a += step) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + a * cell + cell / 2 + 4
       << "\" text-anchor=\"end\">" << first_label + a << "</text>\n";
    os << "<text x=\"" << left + a * cell + cell / 2 << "\" y=\"" << top + n * cell + 16
       << "\" text-anchor=\"middle\">" << first_label + a << "</text>\n";
  }
  os << "<text x=\"" << left + n * cell + 10 << "\" y=\"" << top + 12 << "\">max " << fmt_number(vmax)
     << "</text>\n</svg>\n";
  return os.str();
}

/// Line plot of y against x on log-log axes; points with y <= 0 are dropped.
inline std::string loglog_plot(const std::string& version, const std::string& hash, const std::string& title,
                               const std::string& xlabel, const std::string& ylabel,
                               const std::vector<double>& x, const std::vector<double>& y) {
  const int W = 560, H = 400, left = 70, right = 20, top = 40, bottom = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(y[i])) pts.emplace_back(std::log10(x[i]), std::log10(y[i]));
  std::ostringstream os;
  os << header(version, hash, W, H);
  os << "<text x=\"" << left << "\" y=\"24\">" << title << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
     << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel
     << " (log10)</text>\n";
  os << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 16 "
     << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">" << ylabel << " (log10)</text>\n";
  if (!pts.empty()) {
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (auto [a, b] : pts) {
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (W - left - right - 20) + 10; };
    auto py = [&](double v) { return H - bottom - (v - y0) / (y1 - y0) * (H - top - bottom - 20) - 10; };
    os << "<polyline fill=\"none\" stroke=\"#b01c1c\" stroke-width=\"2\" points=\"";
    for (auto [a, b] : pts) os << fmt_number(px(a)) << "," << fmt_number(py(b)) << " ";
    os << "\"/>\n";
    for (auto [a, b] : pts)
      os << "<circle cx=\"" << fmt_number(px(a)) << "\" cy=\"" << fmt_number(py(b))
         << "\" r=\"4\" fill=\"#b01c1c\"><title>" << fmt_number(std::pow(10.0, a)) << ", "
         << fmt_number(std::pow(10.0, b)) << "</title></circle>\n";
    os << "<text x=\"" << left + 4 << "\" y=\"" << H - bottom + 16 << "\">" << fmt_number(x0) << "</text>\n";
    os << "<text x=\"" << W - right << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"end\">"
       << fmt_number(x1) << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << H - bottom << "\" text-anchor=\"end\">" << fmt_number(y0)
       << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << top + 12 << "\" text-anchor=\"end\">" << fmt_number(y1)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg
}  // namespace decohist
