#pragma once

// Small text helpers shared by the CSV/config readers and writers.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace yoto {

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

/// Parses a full string as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string join_numbers(std::span<const double> values, std::string_view sep = ",");

/// Splits on commas. No quoting support; none of our files need it.
std::vector<std::string> split_csv(std::string_view line);

std::string_view trim(std::string_view text);

}  // namespace yoto
