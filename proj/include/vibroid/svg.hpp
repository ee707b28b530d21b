#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibroid/linalg.hpp"

namespace vibroid {

/// One polyline of an x-y chart.
struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

/// Renders a fixed-size, self-contained SVG line chart. The output is a
/// pure function of the inputs (fixed palette, fixed layout, fixed number
/// formatting), so identical data produces byte-identical files.
void write_line_chart(const std::filesystem::path& path, const PlotSpec& spec,
                      const std::vector<PlotSeries>& series);

}  // namespace vibroid
