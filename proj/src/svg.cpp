#include "efres/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "efres/csv.hpp"

namespace efres {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 500;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

struct Range {
    double lo = 0.0, hi = 1.0;
    double map(double v, double pix_lo, double pix_hi) const {
        const double t = (hi == lo) ? 0.5 : (v - lo) / (hi - lo);
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_line_plot_svg(std::ostream& os, const std::vector<SvgSeries>& series,
                         const std::string& title, const std::string& x_label,
                         const std::string& y_label, bool log_y) {
    Range xr{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    Range yr = xr;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (log_y && yv <= 0.0) continue;
            if (log_y) yv = std::log10(yv);
            xr.lo = std::min(xr.lo, s.x[i]);
            xr.hi = std::max(xr.hi, s.x[i]);
            yr.lo = std::min(yr.lo, yv);
            yr.hi = std::max(yr.hi, yv);
        }
    if (xr.lo > xr.hi) { xr = {0, 1}; yr = {0, 1}; }
    const double pad = 0.05 * (yr.hi - yr.lo + 1e-30);
    yr.lo -= pad;
    yr.hi += pad;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";

    // frame
    os << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
       << kWidth - kMarginL - kMarginR << "\" height=\"" << kHeight - kMarginT - kMarginB
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    // axis labels and extreme ticks
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << kHeight / 2 << ")\">" << y_label << (log_y ? " (log10)" : "") << "</text>\n";
    os << "<text x=\"" << kMarginL << "\" y=\"" << kHeight - kMarginB + 16
       << "\" font-size=\"10\">" << fmt_tick(xr.lo) << "</text>\n";
    os << "<text x=\"" << kWidth - kMarginR << "\" y=\"" << kHeight - kMarginB + 16
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(xr.hi) << "</text>\n";
    os << "<text x=\"" << kMarginL - 4 << "\" y=\"" << kHeight - kMarginB
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(log_y ? std::pow(10, yr.lo) : yr.lo)
       << "</text>\n";
    os << "<text x=\"" << kMarginL - 4 << "\" y=\"" << kMarginT + 10
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(log_y ? std::pow(10, yr.hi) : yr.hi)
       << "</text>\n";

    int legend_y = kMarginT + 14;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (log_y) {
                if (yv <= 0.0) continue;
                yv = std::log10(yv);
            }
            const double px = xr.map(s.x[i], kMarginL, kWidth - kMarginR);
            const double py = yr.map(yv, kHeight - kMarginB, kMarginT);
            os << format_double(px) << ',' << format_double(py) << ' ';
        }
        os << "\"/>\n";
        if (!s.label.empty()) {
            os << "<text x=\"" << kWidth - kMarginR - 8 << "\" y=\"" << legend_y
               << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << s.color << "\">" << s.label
               << "</text>\n";
            legend_y += 14;
        }
    }
    os << "</svg>\n";
}

void write_heatmap_svg(std::ostream& os, const std::vector<double>& x_axis,
                       const std::vector<double>& y_axis,
                       const std::vector<std::vector<double>>& values,
                       const std::string& title) {
    double vmax = 1e-30;
    for (const auto& row : values)
        for (double v : row) vmax = std::max(vmax, std::abs(v));

    const int nx = static_cast<int>(x_axis.size());
    const int ny = static_cast<int>(y_axis.size());
    const double cell_w = static_cast<double>(kWidth - kMarginL - kMarginR) / nx;
    const double cell_h = static_cast<double>(kHeight - kMarginT - kMarginB) / ny;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double t = values[iy][ix] / vmax; // [-1, 1]
            int r, g, b;
            if (t >= 0) { // white -> red
                r = 255;
                g = b = static_cast<int>(std::lround(255 * (1.0 - t)));
            } else { // white -> blue
                b = 255;
                r = g = static_cast<int>(std::lround(255 * (1.0 + t)));
            }
            const double px = kMarginL + ix * cell_w;
            // image rows drawn bottom-up so increasing y points upward
            const double py = kHeight - kMarginB - (iy + 1) * cell_h;
            os << "<rect x=\"" << format_double(px) << "\" y=\"" << format_double(py)
               << "\" width=\"" << format_double(cell_w + 0.5) << "\" height=\""
               << format_double(cell_h + 0.5) << "\" fill=\"rgb(" << r << ',' << g << ',' << b
               << ")\"/>\n";
        }
    }
    os << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
       << kWidth - kMarginL - kMarginR << "\" height=\"" << kHeight - kMarginT - kMarginB
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kMarginL << "\" y=\"" << kHeight - kMarginB + 16 << "\" font-size=\"10\">"
       << fmt_tick(x_axis.front()) << "</text>\n";
    os << "<text x=\"" << kWidth - kMarginR << "\" y=\"" << kHeight - kMarginB + 16
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(x_axis.back()) << "</text>\n";
    os << "<text x=\"" << kMarginL - 4 << "\" y=\"" << kHeight - kMarginB
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(y_axis.front()) << "</text>\n";
    os << "<text x=\"" << kMarginL - 4 << "\" y=\"" << kMarginT + 10
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_tick(y_axis.back()) << "</text>\n";
    os << "</svg>\n";
}

} // namespace efres
