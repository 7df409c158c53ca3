#ifndef SWDO_FIXTURES_HPP
#define SWDO_FIXTURES_HPP

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "swdo/evalstats.hpp"

namespace swdo::fixtures {

/// Bundled fold tables:
///   isic2016         five-fold validation accuracies, ISIC-2016 (verbatim)
///   isic2017         five-fold validation accuracies, ISIC-2017 (verbatim)
///   isic2016_amended isic2016 with four duplicated fold values replaced so the
///                    published pairwise comparisons are reproduced exactly
inline constexpr std::array<std::string_view, 3> names{"isic2016", "isic2017", "isic2016_amended"};

/// Directory holding `<name>_folds.csv`; SWDO_FIXTURE_DIR at build time.
std::filesystem::path default_dir();

std::filesystem::path path_of(std::string_view name, const std::filesystem::path& dir = default_dir());

/// Compiled-in copy of a fixture, used to detect edited or damaged files.
FoldTable builtin(std::string_view name);

/// Reads the fixture file and checks it against the compiled-in copy.
/// Throws DataError naming the fixture on any difference.
FoldTable load(std::string_view name, const std::filesystem::path& dir = default_dir());

/// A published 5x5 comparison block for one backbone family.
struct PublishedFamily {
    std::string family;
    std::vector<std::string> models;
    std::vector<std::vector<std::array<double, 2>>> cells; ///< (statistic, p) per (row, col)
};

/// Published pairwise (statistic, p) values accompanying the ISIC-2016 folds.
const std::vector<PublishedFamily>& published_isic2016();

} // namespace swdo::fixtures

#endif
