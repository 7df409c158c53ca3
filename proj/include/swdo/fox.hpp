#ifndef SWDO_FOX_HPP
#define SWDO_FOX_HPP

#include <algorithm>
#include <string>

#include "swdo/core.hpp"

namespace swdo {

struct FoxParams {
    double c1 = 0.18;                  ///< jump coefficient when the direction draw exceeds the threshold
    double c2 = 0.82;                  ///< jump coefficient otherwise
    double direction_threshold = 0.18;
    double phase_threshold = 0.5;      ///< draws at or above this go to exploitation

    void validate() const
    {
        auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!unit(c1) || !unit(c2) || !unit(direction_threshold) || !unit(phase_threshold))
            throw ConfigError("FoxParams: c1, c2 and both thresholds must lie in [0, 1]");
    }
};

template <typename Scalar>
struct SoundDistance {
    Array<Scalar> sp_s;
    Array<Scalar> dist_s_t;
    Array<Scalar> dist_fox_prey;
};

/// Sound speed, sound-travel distance and fox-prey distance, evaluated as
/// written: dist_s_t = (best / time) * time, which equals best up to rounding,
/// and the prey distance is half of that.
template <typename Scalar>
SoundDistance<Scalar> fox_sound_distance(const Position<Scalar>& best, const Array<Scalar>& time_row)
{
    if (best.size() != time_row.size())
        throw ContractError("fox_sound_distance: best and time_row differ in length");
    if (!(time_row > Scalar(0)).all())
        throw ContractError("fox_sound_distance: time entries must be strictly positive");
    SoundDistance<Scalar> out;
    out.sp_s = best / time_row;
    out.dist_s_t = out.sp_s * time_row;
    out.dist_fox_prey = Scalar(0.5) * out.dist_s_t;
    return out;
}

template <typename Scalar>
Scalar fox_mean_time(const Array<Scalar>& time_row)
{
    if (time_row.size() == 0)
        throw ContractError("fox_mean_time: empty time row");
    return time_row.mean();
}

/// Jump height 0.5 * g * t^2 with t half the mean travel time.
template <typename Scalar>
Scalar fox_jump(const Array<Scalar>& time_row)
{
    const Scalar t = fox_mean_time(time_row) / Scalar(2);
    return Scalar(0.5) * Scalar(9.81) * t * t;
}

template <typename Scalar>
Position<Scalar> fox_exploit_position(const Array<Scalar>& dist_fox_prey, Scalar jump, Scalar coeff)
{
    if (jump < Scalar(0))
        throw ContractError("fox_exploit_position: jump must be non-negative");
    return dist_fox_prey * jump * coeff;
}

/// Exploration control a = 2 * (1 - it / max_it), decreasing from just under 2 to 0.
inline double fox_exploration_control(std::size_t it, std::size_t max_it)
{
    if (it < 1 || it > max_it)
        throw ContractError("fox_exploration_control: iteration " + std::to_string(it) + " outside [1, " +
                            std::to_string(max_it) + "]");
    return 2.0 * (1.0 - static_cast<double>(it) / static_cast<double>(max_it));
}

template <typename Scalar>
Position<Scalar> fox_explore_position(const Position<Scalar>& best, Scalar min_t, Scalar a, const Array<Scalar>& u)
{
    if (min_t < Scalar(0))
        throw ContractError("fox_explore_position: min_t must be non-negative");
    if (u.size() != best.size())
        throw ContractError("fox_explore_position: random row length mismatch");
    return best * u * min_t * a;
}

template <typename Scalar>
Position<Scalar> fox_explore_position(const Position<Scalar>& best, Scalar min_t, Scalar a, RngStream& rng)
{
    return fox_explore_position(best, min_t, a, rng.uniform_array<Scalar>(best.size()));
}

/// Per-run scratch: each agent's latest sound-travel time row and its mean.
template <typename Scalar>
struct FoxScratch {
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> time_matrix; ///< agents x dims, entries in (0, 1]
    Array<Scalar> tt;                                                ///< per-agent mean time

    Scalar min_t() const { return tt.minCoeff(); }

    void set_row(Eigen::Index agent, const Array<Scalar>& row)
    {
        time_matrix.row(agent) = row.transpose();
        tt[agent] = row.mean();
    }
};

namespace detail {

template <typename Scalar>
Array<Scalar> fox_time_row(Eigen::Index dims, RngStream& rng)
{
    Array<Scalar> row(dims);
    for (Eigen::Index d = 0; d < dims; ++d)
        row[d] = static_cast<Scalar>(1.0 - rng.uniform()); // (0, 1]
    return row;
}

} // namespace detail

/// FOX optimizer. Each iteration every agent either jumps (exploitation, with
/// probability 1 - phase_threshold) or random-walks around the best position.
template <typename Scalar>
OptResult<Scalar> fox_optimize(const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                               const FoxParams& params, const Budget& budget, std::uint64_t seed,
                               const RunOptions& opts = {})
{
    params.validate();
    budget.validate();
    const auto n = budget.population_size;
    const auto dims = space.dims();

    RunTracker<Scalar> track(seed);
    auto pop = init_population(space, budget, seed);
    track.absorb(evaluate_population(pop, objective, 0, opts.workers));
    track.offer_all(pop);

    FoxScratch<Scalar> scratch{decltype(FoxScratch<Scalar>::time_matrix)(n, dims), Array<Scalar>(n)};
    {
        RngStream init(seed, agent_stream(0, 0, 0xF0C5));
        for (std::size_t i = 0; i < n; ++i)
            scratch.set_row(static_cast<Eigen::Index>(i), detail::fox_time_row<Scalar>(dims, init));
    }

    for (std::size_t it = 1; it <= budget.max_iterations; ++it) {
        const auto a = static_cast<Scalar>(fox_exploration_control(it, budget.max_iterations));
        const Position<Scalar> best = track.best_position();
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(seed, agent_stream(it, i));
            Position<Scalar> next;
            if (rng.uniform() >= params.phase_threshold) {
                const auto row = detail::fox_time_row<Scalar>(dims, rng);
                scratch.set_row(static_cast<Eigen::Index>(i), row);
                auto sd = fox_sound_distance(best, row);
                sd.dist_fox_prey = guard_magnitude(sd.dist_fox_prey, track.guard_counter());
                const Scalar coeff = static_cast<Scalar>(rng.uniform() > params.direction_threshold ? params.c1
                                                                                                     : params.c2);
                next = fox_exploit_position(sd.dist_fox_prey, fox_jump(row), coeff);
            } else {
                next = fox_explore_position(best, scratch.min_t(), a, rng);
            }
            pop[i].position = clamp_to_bounds(guard_magnitude(next, track.guard_counter()), space);
            pop[i].fitness.reset();
        }
        track.absorb(evaluate_population(pop, objective, it, opts.workers));
        track.offer_all(pop);
        track.record(pop);
    }
    return std::move(track).finish();
}

} // namespace swdo

#endif
