#pragma once

#include <string>
#include <vector>

namespace dblend::cli {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool connect = true;
};

/// Self-contained SVG scatter/line chart; byte-deterministic for fixed
/// inputs (no timestamps or random ids).
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

}  // namespace dblend::cli
