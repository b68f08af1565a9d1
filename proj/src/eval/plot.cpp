#include "nltrack/eval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace nltrack::eval {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 62.0, kRight = 24.0, kTop = 44.0, kBottom = 52.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string esc(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<Series>& series) {
    if (series.empty()) fail(ErrorCode::config_invalid, "plot has no series");
    double x_min = 0.0, x_max = 0.0, y_max = 0.0;
    bool first = true;
    for (const Series& s : series) {
        if (s.xs.size() != s.ys.size())
            fail(ErrorCode::shape_error, "series '" + s.name + "' has ragged coordinates");
        if (s.xs.empty())
            fail(ErrorCode::config_invalid, "series '" + s.name + "' is empty");
        for (size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i]))
                fail(ErrorCode::config_invalid, "series '" + s.name + "' has non-finite points");
            if (first) {
                x_min = x_max = s.xs[i];
                first = false;
            } else {
                x_min = std::min(x_min, s.xs[i]);
                x_max = std::max(x_max, s.xs[i]);
            }
            y_max = std::max(y_max, s.ys[i]);
        }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.05;  // headroom so the top of a curve is not clipped

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) { return kTop + ph - y / y_max * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           esc(title) + "</text>\n";

    // Axes and ticks: five divisions each way.
    svg += "<g stroke=\"#444\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(kTop + ph) + "\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" +
           fmt(kLeft + pw) + "\" y2=\"" + fmt(kTop + ph) + "\"/>\n";
    svg += "</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 5.0;
        const double yv = y_max * i / 5.0;
        svg += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" +
               fmt(px(xv)) + "\" y2=\"" + fmt(kTop + ph + 5) +
               "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(kTop + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + fmt(xv) + "</text>\n";
        svg += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" +
               fmt(kLeft) + "\" y2=\"" + fmt(py(yv)) +
               "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + fmt(yv) + "</text>\n";
        if (i > 0) {
            svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" +
                   fmt(kLeft + pw) + "\" y2=\"" + fmt(py(yv)) +
                   "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        }
    }
    svg += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + esc(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt(kTop + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
           fmt(kTop + ph / 2) + ")\">" + esc(y_label) + "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        std::string pts;
        for (size_t i = 0; i < s.xs.size(); ++i) {
            if (i) pts += ' ';
            pts += fmt(px(s.xs[i])) + "," + fmt(py(s.ys[i]));
        }
        svg += std::string("<polyline fill=\"none\" stroke=\"") + color +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        const double ly = kTop + 8 + 16.0 * si;
        svg += std::string("<line x1=\"") + fmt(kLeft + pw - 150) + "\" y1=\"" + fmt(ly) +
               "\" x2=\"" + fmt(kLeft + pw - 126) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" +
               color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(kLeft + pw - 120) + "\" y=\"" + fmt(ly + 4) +
               "\" font-size=\"12\">" + esc(s.name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
    const std::string svg = render_line_plot(title, x_label, y_label, series);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write plot '" + path + "'");
    out.write(svg.data(), static_cast<std::streamsize>(svg.size()));
    if (!out) fail(ErrorCode::io_error, "short write to plot '" + path + "'");
}

}  // namespace nltrack::eval
