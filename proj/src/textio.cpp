#include "curio/textio.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace curio {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double value, int digits) {
  // avoid "-0.000"
  const double scale = std::pow(10.0, digits);
  if (std::round(value * scale) == 0.0) value = 0.0;
  std::array<char, 64> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, digits);
  return std::string(buf.data(), ptr);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(begin));
      break;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return out;
}

}  // namespace curio
