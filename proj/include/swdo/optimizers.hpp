#ifndef SWDO_OPTIMIZERS_HPP
#define SWDO_OPTIMIZERS_HPP

#include <array>
#include <ostream>
#include <string>
#include <string_view>

#include "swdo/format.hpp"
#include "swdo/fox.hpp"
#include "swdo/gwo.hpp"
#include "swdo/mgto.hpp"

namespace swdo {

enum class Algorithm { fox, gwo, igwo, mgto };

inline constexpr std::array<Algorithm, 4> all_algorithms{Algorithm::fox, Algorithm::gwo, Algorithm::igwo,
                                                         Algorithm::mgto};

inline std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::fox: return "fox";
    case Algorithm::gwo: return "gwo";
    case Algorithm::igwo: return "igwo";
    case Algorithm::mgto: return "mgto";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    for (auto a : all_algorithms)
        if (to_string(a) == name)
            return a;
    throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected fox, gwo, igwo or mgto)");
}

/// Parameters for every algorithm; only the selected one is read.
struct OptimizerParams {
    FoxParams fox;
    IgwoParams igwo;
    MgtoParams mgto;
};

template <typename Scalar>
OptResult<Scalar> optimize(Algorithm algo, const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                           const Budget& budget, std::uint64_t seed, const OptimizerParams& params = {},
                           const RunOptions& opts = {})
{
    switch (algo) {
    case Algorithm::fox: return fox_optimize(objective, space, params.fox, budget, seed, opts);
    case Algorithm::gwo: return gwo_optimize(objective, space, budget, seed, opts);
    case Algorithm::igwo: return igwo_optimize(objective, space, params.igwo, budget, seed, opts);
    case Algorithm::mgto: return mgto_optimize(objective, space, params.mgto, budget, seed, opts);
    }
    throw ConfigError("unknown algorithm");
}

/// `iteration,best,mean`, one row per iteration starting at 1.
inline void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history)
{
    out << "iteration,best,mean\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i + 1 << ',' << format_double(history[i].best) << ',' << format_double(history[i].mean) << '\n';
}

} // namespace swdo

#endif
