#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kasync {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Line chart with auto-scaled axes and a small legend.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

/// Bar chart over integer bins.
void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::map<long, double>& bars);

}  // namespace kasync
