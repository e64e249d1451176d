#pragma once

// Minimal deterministic SVG line plots (used for ECDF and growth curves).
// Output bytes depend only on the input series: fixed canvas, fixed-precision
// coordinates, fixed color palette.

#include <string>
#include <utility>
#include <vector>

namespace msgd {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;  // (x, y)
};

// Renders a standalone SVG document with axes, tick labels, a legend, and one
// polyline per series. Throws "empty series" when there are no series or any
// series has no points.
std::string render_svg(const std::vector<Series>& series);

void emit_svg(const std::vector<Series>& series, const std::string& path);

}  // namespace msgd
