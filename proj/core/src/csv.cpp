#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <system_error>

namespace phswing::csv {

std::string format(double value)
{
    char buffer[64];
    int n = std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return std::string(buffer, static_cast<std::size_t>(n));
}

std::vector<std::string> split_row(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

std::string trim(std::string_view text)
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

double parse_number(std::string_view cell, std::size_t line, std::string_view column)
{
    double value = 0.0;
    auto result = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || result.ec != std::errc() || result.ptr != cell.data() + cell.size()
        || !std::isfinite(value)) {
        throw DataError("line " + std::to_string(line) + ": column '" + std::string(column)
                        + "' is not a finite number: '" + std::string(cell) + "'");
    }
    return value;
}

void write_row(std::ostream& out, const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out << ',';
        out << format(values[i]);
    }
    out << '\n';
}

}  // namespace phswing::csv
