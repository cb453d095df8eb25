#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rsma {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal line chart: axes, ticks, one polyline per series, legend.
void write_svg_chart(const std::string& path, const std::vector<SvgSeries>& series,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title);

}  // namespace rsma
