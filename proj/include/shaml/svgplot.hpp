#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shaml {

// Deterministic static SVG figures: identical input produces byte-identical
// output (fixed canvas, fixed palette, fixed number formatting).

struct BarChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> group_labels;            // one per bar group
    std::vector<std::string> series_names;            // legend entries
    std::vector<std::vector<double>> values;          // [series][group]
    double y_min = 0.0;
    double y_max = 1.0;
};

struct LineSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
    bool log_x = false;
};

struct ScatterSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct ScatterChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ScatterSeries> series;  // one color per series
};

void emit_bar_svg(const BarChart& chart, const std::string& path);
void emit_line_svg(const LineChart& chart, const std::string& path);
void emit_scatter_svg(const ScatterChart& chart, const std::string& path);

std::string render_bar_svg(const BarChart& chart);
std::string render_line_svg(const LineChart& chart);
std::string render_scatter_svg(const ScatterChart& chart);

}  // namespace shaml
