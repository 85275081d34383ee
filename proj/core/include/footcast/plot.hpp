#pragma once

#include <string>
#include <vector>

namespace footcast::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool points = false;  // markers instead of a polyline
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

std::string line_chart(const std::vector<Series>& series, const Axes& axes);

struct Bars {
  std::string label;
  std::vector<double> values;
  std::string color = "#1f77b4";
};

/// Grouped bar chart over shared category names.
std::string bar_chart(const std::vector<std::string>& categories, const std::vector<Bars>& groups, const Axes& axes);

extern const std::vector<std::string> kPalette;

}  // namespace footcast::plot
