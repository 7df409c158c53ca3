#ifndef SWDO_ACCEPTANCE_HPP
#define SWDO_ACCEPTANCE_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "swdo/fixtures.hpp"

namespace swdo::acceptance {

inline constexpr int criterion_count = 8;

struct Options {
    std::filesystem::path fixture_dir = fixtures::default_dir();
    std::size_t workers = 1;
};

struct Result {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    std::vector<std::string> notes; ///< informational, never affects `passed`
    double seconds = 0.0;
    double time_limit = 0.0;
};

/// Runs one criterion (1..8). Exceptions become a failed result.
Result run(int id, const Options& opts = {});

std::string format_line(const Result& r);
std::string to_json(const std::vector<Result>& results);

} // namespace swdo::acceptance

#endif
