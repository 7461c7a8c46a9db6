#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "arband/ar_model.hpp"
#include "arband/errors.hpp"

namespace arband {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

// Single-column CSV, '.' decimal, optional "value" header. Non-finite
// entries are rejected; blank lines are not allowed mid-file.
inline time_series read_series_csv(const std::string& path, bool center = false) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    time_series out;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(raw);
        if (line.empty()) {
            if (in.peek() == std::ifstream::traits_type::eof()) break;  // trailing newline
            throw parse_error(path + ": blank line " + std::to_string(line_no), line_no);
        }
        if (line_no == 1 && line == "value") continue;
        const char* begin = line.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || !detail::trim(end).empty())
            throw parse_error(path + ": cannot parse \"" + line + "\" at line " +
                                  std::to_string(line_no),
                              line_no);
        if (!std::isfinite(v))
            throw parse_error(path + ": non-finite value at line " + std::to_string(line_no),
                              line_no);
        out.values.push_back(v);
    }
    if (out.values.empty()) throw empty_series(path + ": no observations");

    if (center) {
        double mean = 0.0;
        for (double v : out.values) mean += v;
        mean /= out.n();
        for (double& v : out.values) v -= mean;
    }
    return out;
}

inline void write_series_csv(const std::string& path, const time_series& series) {
    std::ofstream outf(path, std::ios::binary);  // LF endings everywhere
    if (!outf) throw io_error("cannot write " + path);
    outf << "value\n";
    outf.precision(17);
    for (double v : series.values) outf << v << "\n";
    if (!outf) throw io_error("write failed for " + path);
}

}  // namespace arband
