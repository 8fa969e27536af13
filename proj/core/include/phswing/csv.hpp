#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phswing::csv {

// 17 significant digits, enough to round-trip any double.
std::string format(double value);

std::vector<std::string> split_row(std::string_view line);
std::string trim(std::string_view text);

// Parses a full numeric cell; throws DataError mentioning the line on failure.
double parse_number(std::string_view cell, std::size_t line, std::string_view column);

void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace phswing::csv
