#pragma once

#include <string>
#include <vector>

namespace peaklab {

// Minimal line-plot writer: enough SVG for diagnostic curves, nothing more.
struct PlotSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series);

} // namespace peaklab
