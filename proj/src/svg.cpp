#include "msgd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace msgd {

namespace {

// Canvas geometry (pixels).
constexpr double kWidth = 800.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 770.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 470.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fixed6(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return std::string(buf);
}

std::string tick_label(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::vector<Series>& series) {
    if (series.empty()) throw std::invalid_argument("empty series");
    for (const auto& s : series)
        if (s.pts.empty()) throw std::invalid_argument("empty series");

    double xmin = series[0].pts[0].first, xmax = xmin;
    double ymin = series[0].pts[0].second, ymax = ymin;
    for (const auto& s : series)
        for (const auto& [x, y] : s.pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymax > ymin)) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const auto px = [&](double x) {
        return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft);
    };
    const auto py = [&](double y) {
        return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + tick_label(kWidth) +
           "\" height=\"" + tick_label(kHeight) + "\" viewBox=\"0 0 " + tick_label(kWidth) + " " +
           tick_label(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + tick_label(kWidth) + "\" height=\"" +
           tick_label(kHeight) + "\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + fixed6(kLeft) + "\" y1=\"" + fixed6(kBottom) + "\" x2=\"" +
           fixed6(kRight) + "\" y2=\"" + fixed6(kBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fixed6(kLeft) + "\" y1=\"" + fixed6(kTop) + "\" x2=\"" +
           fixed6(kLeft) + "\" y2=\"" + fixed6(kBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks: 5 per axis
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double gx = px(fx);
        const double gy = py(fy);
        svg += "<line x1=\"" + fixed6(gx) + "\" y1=\"" + fixed6(kBottom) + "\" x2=\"" +
               fixed6(gx) + "\" y2=\"" + fixed6(kBottom + 6.0) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fixed6(gx) + "\" y=\"" + fixed6(kBottom + 20.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               escape_xml(tick_label(fx)) + "</text>\n";
        svg += "<line x1=\"" + fixed6(kLeft - 6.0) + "\" y1=\"" + fixed6(gy) + "\" x2=\"" +
               fixed6(kLeft) + "\" y2=\"" + fixed6(gy) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fixed6(kLeft - 10.0) + "\" y=\"" + fixed6(gy + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
               escape_xml(tick_label(fy)) + "</text>\n";
    }

    // one polyline per series
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        std::string pts;
        for (const auto& [x, y] : series[s].pts) {
            if (!pts.empty()) pts.push_back(' ');
            pts += fixed6(px(x)) + "," + fixed6(py(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }

    // legend, top-right
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
        svg += "<line x1=\"" + fixed6(kRight - 150.0) + "\" y1=\"" + fixed6(ly - 4.0) +
               "\" x2=\"" + fixed6(kRight - 120.0) + "\" y2=\"" + fixed6(ly - 4.0) +
               "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fixed6(kRight - 112.0) + "\" y=\"" + fixed6(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(series[s].name) +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

void emit_svg(const std::vector<Series>& series, const std::string& path) {
    const std::string doc = render_svg(series);
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    out << doc;
    if (!out) throw std::runtime_error("cannot write svg: " + path);
}

}  // namespace msgd
