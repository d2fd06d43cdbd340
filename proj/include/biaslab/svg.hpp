#pragma once

#include <string>
#include <vector>

namespace biaslab {

// Minimal hand-rendered SVG line charts; CSV stays the authoritative output.
struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN entries break the line
};

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<ChartSeries>& series);

}  // namespace biaslab
