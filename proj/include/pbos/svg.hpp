#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbos {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Plain polyline chart with axes, tick labels and a legend. Non-finite
// points are skipped.
void write_line_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::vector<PlotSeries>& series);

}  // namespace pbos
