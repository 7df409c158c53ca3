#ifndef SWDO_CLI_HPP
#define SWDO_CLI_HPP

#include <string>
#include <vector>

namespace swdo::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;
inline constexpr int exit_acceptance = 3;

/// Entry point of the `swdo` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args);

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

} // namespace swdo::cli

#endif
