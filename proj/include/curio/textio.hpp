#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace curio {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Fixed-point form with `digits` decimals, for drawings where a stable
/// width matters more than exact round-trip.
std::string format_fixed(double value, int digits);

/// Splits on commas; no quoting (none of our files need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace curio
