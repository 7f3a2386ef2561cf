#pragma once

#include <string>
#include <vector>

namespace lito {

struct Series {
    std::string label;
    std::vector<double> ys;
};

// Line chart: one polyline per series over shared x labels. Deterministic
// output (fixed palette, %.2f coordinates).
std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<Series>& series, const std::string& y_label);

// Grouped bar chart: one bar group per x label, one bar per series within it.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& x_labels,
                          const std::vector<Series>& series, const std::string& y_label);

}  // namespace lito
