#include "shaml/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "shaml/errors.hpp"

namespace shaml {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;  // room for the legend
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void open_svg(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth)
       << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " "
       << fmt(kHeight) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">"
       << escape(title) << "</text>\n";
}

void axis_labels(std::ostringstream& os, const std::string& x_label,
                 const std::string& y_label) {
    os << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\""
       << fmt(kHeight - 20) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"13\">"
       << escape(x_label) << "</text>\n";
    os << "<text x=\"20\" y=\"" << fmt((kTop + kHeight - kBottom) / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "transform=\"rotate(-90 20 "
       << fmt((kTop + kHeight - kBottom) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<std::string>& names) {
    const double x = kWidth - kRight + 16;
    for (std::size_t s = 0; s < names.size(); ++s) {
        const double y = kTop + 12 + 20.0 * static_cast<double>(s);
        os << "<rect class=\"legend\" x=\"" << fmt(x) << "\" y=\"" << fmt(y - 9)
           << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[s % kPaletteSize]
           << "\"/>\n";
        os << "<text x=\"" << fmt(x + 18) << "\" y=\"" << fmt(y + 2)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(names[s])
           << "</text>\n";
    }
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (hi <= lo) hi = lo + 1.0;
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    std::vector<double> ticks;
    const double start = std::ceil(lo / step) * step;
    for (double t = start; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
    return ticks;
}

void y_axis(std::ostringstream& os, double lo, double hi,
            const std::function<double(double)>& ymap) {
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
       << "\" y2=\"" << fmt(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(lo, hi)) {
        const double y = ymap(t);
        os << "<line x1=\"" << fmt(kLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\""
           << fmt(kLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
}

}  // namespace

std::string render_bar_svg(const BarChart& chart) {
    if (chart.series_names.empty() || chart.group_labels.empty())
        throw EmptyData("bar chart needs series and groups");
    if (chart.values.size() != chart.series_names.size())
        throw DimensionMismatch("bar chart values/series mismatch");
    for (const auto& row : chart.values) {
        if (row.size() != chart.group_labels.size())
            throw DimensionMismatch("bar chart values/groups mismatch");
        for (double v : row)
            if (!std::isfinite(v)) throw EmptyData("bar chart has non-finite value");
    }

    const double lo = chart.y_min;
    const double hi = chart.y_max;
    auto ymap = [&](double v) {
        return kHeight - kBottom - (v - lo) / (hi - lo) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    open_svg(os, chart.title);
    y_axis(os, lo, hi, ymap);
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\""
       << fmt(kWidth - kRight) << "\" y2=\"" << fmt(kHeight - kBottom)
       << "\" stroke=\"black\"/>\n";

    const std::size_t ngroups = chart.group_labels.size();
    const std::size_t nseries = chart.series_names.size();
    const double span = kWidth - kLeft - kRight;
    const double group_w = span / static_cast<double>(ngroups);
    const double bar_w = group_w * 0.8 / static_cast<double>(nseries);

    for (std::size_t gidx = 0; gidx < ngroups; ++gidx) {
        const double gx = kLeft + group_w * static_cast<double>(gidx) + group_w * 0.1;
        for (std::size_t s = 0; s < nseries; ++s) {
            const double v = std::clamp(chart.values[s][gidx], lo, hi);
            const double x = gx + bar_w * static_cast<double>(s);
            const double y = ymap(v);
            os << "<rect class=\"bar\" x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
               << fmt(bar_w * 0.92) << "\" height=\"" << fmt(kHeight - kBottom - y)
               << "\" fill=\"" << kPalette[s % kPaletteSize] << "\"/>\n";
        }
        os << "<text x=\"" << fmt(gx + group_w * 0.4) << "\" y=\"" << fmt(kHeight - kBottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << escape(chart.group_labels[gidx]) << "</text>\n";
    }
    legend(os, chart.series_names);
    axis_labels(os, chart.x_label, chart.y_label);
    os << "</svg>\n";
    return os.str();
}

std::string render_line_svg(const LineChart& chart) {
    if (chart.series.empty()) throw EmptyData("line chart needs series");
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    bool first = true;
    std::size_t total = 0;
    for (const auto& s : chart.series) {
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) throw EmptyData("non-finite point");
            const double xv = chart.log_x ? std::log10(x) : x;
            if (first) {
                xlo = xhi = xv;
                ylo = yhi = y;
                first = false;
            }
            xlo = std::min(xlo, xv);
            xhi = std::max(xhi, xv);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
            ++total;
        }
    }
    if (total == 0) throw EmptyData("line chart has no points");
    if (xhi == xlo) xhi = xlo + 1;
    if (yhi == ylo) yhi = ylo + 1;

    auto xmap = [&](double v) {
        const double xv = chart.log_x ? std::log10(v) : v;
        return kLeft + (xv - xlo) / (xhi - xlo) * (kWidth - kLeft - kRight);
    };
    auto ymap = [&](double v) {
        return kHeight - kBottom - (v - ylo) / (yhi - ylo) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    open_svg(os, chart.title);
    y_axis(os, ylo, yhi, ymap);
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\""
       << fmt(kWidth - kRight) << "\" y2=\"" << fmt(kHeight - kBottom)
       << "\" stroke=\"black\"/>\n";

    std::vector<std::string> names;
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        names.push_back(chart.series[s].name);
        if (chart.series[s].points.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
           << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : chart.series[s].points)
            os << fmt(xmap(x)) << "," << fmt(ymap(y)) << " ";
        os << "\"/>\n";
    }
    legend(os, names);
    axis_labels(os, chart.x_label, chart.y_label);
    os << "</svg>\n";
    return os.str();
}

std::string render_scatter_svg(const ScatterChart& chart) {
    if (chart.series.empty()) throw EmptyData("scatter chart needs series");
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    bool first = true;
    std::size_t total = 0;
    for (const auto& s : chart.series) {
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) throw EmptyData("non-finite point");
            if (first) {
                xlo = xhi = x;
                ylo = yhi = y;
                first = false;
            }
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
            ++total;
        }
    }
    if (total == 0) throw EmptyData("scatter chart has no points");
    if (xhi == xlo) xhi = xlo + 1;
    if (yhi == ylo) yhi = ylo + 1;

    auto xmap = [&](double v) {
        return kLeft + (v - xlo) / (xhi - xlo) * (kWidth - kLeft - kRight);
    };
    auto ymap = [&](double v) {
        return kHeight - kBottom - (v - ylo) / (yhi - ylo) * (kHeight - kTop - kBottom);
    };

    std::ostringstream os;
    open_svg(os, chart.title);
    y_axis(os, ylo, yhi, ymap);
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\""
       << fmt(kWidth - kRight) << "\" y2=\"" << fmt(kHeight - kBottom)
       << "\" stroke=\"black\"/>\n";

    std::vector<std::string> names;
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        names.push_back(chart.series[s].name);
        for (auto [x, y] : chart.series[s].points) {
            os << "<circle cx=\"" << fmt(xmap(x)) << "\" cy=\"" << fmt(ymap(y))
               << "\" r=\"2\" fill=\"" << kPalette[s % kPaletteSize]
               << "\" fill-opacity=\"0.6\"/>\n";
        }
    }
    legend(os, names);
    axis_labels(os, chart.x_label, chart.y_label);
    os << "</svg>\n";
    return os.str();
}

namespace {
void write_file(const std::string& content, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}
}  // namespace

void emit_bar_svg(const BarChart& chart, const std::string& path) {
    write_file(render_bar_svg(chart), path);
}
void emit_line_svg(const LineChart& chart, const std::string& path) {
    write_file(render_line_svg(chart), path);
}
void emit_scatter_svg(const ScatterChart& chart, const std::string& path) {
    write_file(render_scatter_svg(chart), path);
}

}  // namespace shaml
