#ifndef EFRES_CSV_HPP
#define EFRES_CSV_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace efres {

// Shortest round-trip decimal representation, '.' separator, locale-free.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that still round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char trial[40];
        std::snprintf(trial, sizeof(trial), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(trial, "%lf", &back);
        if (back == v) return trial;
    }
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

    template <typename... Ts>
    void numeric_row(Ts... vals) {
        row({format_double(static_cast<double>(vals))...});
    }

private:
    std::ostream& os_;
};

// Minimal reader: splits lines on commas, no quoting (none of our files need it).
std::vector<std::vector<std::string>> read_csv(std::istream& is);
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);

} // namespace efres

#endif
