#ifndef EFRES_SVG_HPP
#define EFRES_SVG_HPP

#include <ostream>
#include <string>
#include <vector>

namespace efres {

struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    std::string label;
};

// Minimal self-contained line plot, no external renderer.
void write_line_plot_svg(std::ostream& os, const std::vector<SvgSeries>& series,
                         const std::string& title, const std::string& x_label,
                         const std::string& y_label, bool log_y = false);

// Diverging blue-white-red heatmap, symmetric about zero (Wigner style).
void write_heatmap_svg(std::ostream& os, const std::vector<double>& x_axis,
                       const std::vector<double>& y_axis,
                       const std::vector<std::vector<double>>& values,
                       const std::string& title);

} // namespace efres

#endif
