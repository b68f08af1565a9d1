#pragma once

#include <string>
#include <vector>

#include "nltrack/common.hpp"

namespace nltrack::eval {

struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;  // same length as xs
};

// Renders a self-contained SVG line plot. Axes are scaled to the data with
// the y range always anchored at 0 so curves from different runs compare at
// a glance. Errors: config_invalid on no data, shape_error on ragged series,
// io_error when the file cannot be written.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<Series>& series);

}  // namespace nltrack::eval
