#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tumorsynth::cli {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Minimal static SVG charts for the report subcommand.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);
std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::pair<std::string, double>>& bars);

}  // namespace tumorsynth::cli
