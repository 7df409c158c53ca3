#ifndef SWDO_FORMAT_HPP
#define SWDO_FORMAT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace swdo {

/// Shortest decimal text that parses back to exactly `v`; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_double(double v);

std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view s);

std::string to_lower(std::string_view s);

} // namespace swdo

#endif
