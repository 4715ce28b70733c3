#pragma once

#include <string>
#include <vector>

namespace iofts {

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line chart (axes, grid, legend) for the trajectory plots.
void writeSvgChart(const std::string& path, const std::string& title,
                   const std::vector<SvgSeries>& series, const std::string& xLabel = "t [s]",
                   const std::string& yLabel = "");

}  // namespace iofts
