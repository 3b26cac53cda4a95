#include "kasync/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kasync/errors.hpp"
#include "kasync/io.hpp"

namespace kasync {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 60.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double xmin, xmax, ymin, ymax;
  double px(double x) const {
    return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  }
};

void open_svg(std::ostringstream& out, const std::string& title, const std::string& x_label,
              const std::string& y_label) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << esc(title) << "</text>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">" << esc(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << kHeight / 2
      << ")\">" << esc(y_label) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f) {
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = f.xmin + (f.xmax - f.xmin) * t / 4.0;
    const double yv = f.ymin + (f.ymax - f.ymin) * t / 4.0;
    char xb[32], yb[32];
    std::snprintf(xb, sizeof(xb), "%.4g", xv);
    std::snprintf(yb, sizeof(yb), "%.4g", yv);
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << xb << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << yb << "</text>\n";
  }
}

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  bool any = false;
  Frame f{0, 1, 0, 1};
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        f = {x, x, y, y};
        any = true;
      }
      f.xmin = std::min(f.xmin, x);
      f.xmax = std::max(f.xmax, x);
      f.ymin = std::min(f.ymin, y);
      f.ymax = std::max(f.ymax, y);
    }
  }
  if (!any) throw UsageError("plot: no points to draw");
  if (f.xmax == f.xmin) f.xmax = f.xmin + 1.0;
  if (f.ymax == f.ymin) f.ymax = f.ymin + 1.0;

  std::ostringstream out;
  open_svg(out, title, x_label, y_label);
  draw_axes(out, f);
  std::size_t ci = 0;
  for (const auto& s : series) {
    const char* color = kColors[ci % (sizeof(kColors) / sizeof(kColors[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) out << f.px(x) << "," << f.py(y) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 + 14 * static_cast<double>(ci)
        << "\" font-size=\"11\" fill=\"" << color << "\">" << esc(s.label) << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  atomic_write_file(path, out.str());
}

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::map<long, double>& bars) {
  if (bars.empty()) throw UsageError("plot: no bars to draw");
  const double xmin = static_cast<double>(bars.begin()->first) - 0.5;
  const double xmax = static_cast<double>(bars.rbegin()->first) + 0.5;
  double ymax = 0.0;
  for (const auto& [k, v] : bars) ymax = std::max(ymax, v);
  if (ymax == 0.0) ymax = 1.0;
  Frame f{xmin, xmax, 0.0, ymax * 1.05};

  std::ostringstream out;
  open_svg(out, title, x_label, y_label);
  draw_axes(out, f);
  const double slot = (kWidth - kLeft - kRight) / (xmax - xmin);
  for (const auto& [k, v] : bars) {
    const double x0 = f.px(static_cast<double>(k) - 0.4);
    const double y0 = f.py(v);
    out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << slot * 0.8 << "\" height=\""
        << (kHeight - kBottom - y0) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  atomic_write_file(path, out.str());
}

}  // namespace kasync
