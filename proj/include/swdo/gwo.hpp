#ifndef SWDO_GWO_HPP
#define SWDO_GWO_HPP

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swdo/core.hpp"

namespace swdo {

struct IgwoParams {
    double a_min = 0.02;
    double a_max = 2.2;
    double eta_alpha = 1.0;
    double eta_delta = 0.5;

    void validate() const
    {
        if (!(a_min > 0.0 && a_min < a_max))
            throw ConfigError("IgwoParams: need 0 < a_min < a_max");
        if (!(eta_alpha > 0.0 && eta_delta > 0.0))
            throw ConfigError("IgwoParams: growth factors must be positive");
    }
};

struct LeaderSchedule {
    double a_alpha;
    double a_beta;
    double a_delta;
};

/// Exponential decay of the control parameter for each leader; beta is the
/// mean of alpha and delta.
inline LeaderSchedule igwo_a_schedule(std::size_t i, std::size_t i_max, const IgwoParams& p)
{
    if (i > i_max || i_max == 0)
        throw ContractError("igwo_a_schedule: need 0 <= i <= i_max and i_max > 0");
    const double frac = static_cast<double>(i) / static_cast<double>(i_max);
    const double log_ratio = std::log(p.a_min / p.a_max);
    const double a_alpha = p.a_max * std::exp(frac * p.eta_alpha * log_ratio);
    const double a_delta = p.a_max * std::exp(frac * p.eta_delta * log_ratio);
    return {a_alpha, 0.5 * (a_alpha + a_delta), a_delta};
}

/// Classic GWO: one linear decay from 2 to 0 shared by all leaders.
inline LeaderSchedule gwo_linear_schedule(std::size_t i, std::size_t i_max)
{
    if (i > i_max || i_max == 0)
        throw ContractError("gwo_linear_schedule: need 0 <= i <= i_max and i_max > 0");
    const double a = 2.0 * (1.0 - static_cast<double>(i) / static_cast<double>(i_max));
    return {a, a, a};
}

/// leader - (2*a*r1 - a) * |2*r2*leader - x|, element-wise.
template <typename Scalar>
Position<Scalar> gwo_encircle(const Position<Scalar>& leader, const Position<Scalar>& x, Scalar a,
                              const Array<Scalar>& r1, const Array<Scalar>& r2)
{
    if (leader.size() != x.size() || r1.size() != x.size() || r2.size() != x.size())
        throw ContractError("gwo_encircle: dimension mismatch");
    const Array<Scalar> dist = (Scalar(2) * r2 * leader - x).abs();
    const Array<Scalar> step = Scalar(2) * a * r1 - a;
    return leader - step * dist;
}

template <typename Scalar>
Position<Scalar> gwo_encircle(const Position<Scalar>& leader, const Position<Scalar>& x, Scalar a, RngStream& rng)
{
    const auto r1 = rng.uniform_array<Scalar>(x.size());
    const auto r2 = rng.uniform_array<Scalar>(x.size());
    return gwo_encircle(leader, x, a, r1, r2);
}

/// The three fittest wolves seen so far, ascending by fitness.
template <typename Scalar>
struct IgwoLeaders {
    Agent<Scalar> alpha;
    Agent<Scalar> beta;
    Agent<Scalar> delta;

    /// Inserts `a` into the hierarchy if it beats any current leader.
    void consider(const Agent<Scalar>& a)
    {
        const Scalar f = *a.fitness;
        if (f < *alpha.fitness) {
            delta = beta;
            beta = alpha;
            alpha = a;
        } else if (f < *beta.fitness) {
            delta = beta;
            beta = a;
        } else if (f < *delta.fitness) {
            delta = a;
        }
    }
};

/// Leaders from an evaluated population (stable: ties keep population order).
template <typename Scalar>
IgwoLeaders<Scalar> rank_leaders(const Population<Scalar>& pop)
{
    if (pop.size() < 3)
        throw ConfigError("grey wolf optimizers need population_size >= 3");
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto l, auto r) { return *pop[l].fitness < *pop[r].fitness; });
    return {pop[idx[0]], pop[idx[1]], pop[idx[2]]};
}

namespace detail {

template <typename Scalar, typename Schedule>
OptResult<Scalar> grey_wolf_loop(const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                                 const Budget& budget, std::uint64_t seed, const RunOptions& opts,
                                 Schedule&& schedule)
{
    budget.validate();
    if (budget.population_size < 3)
        throw ConfigError("grey wolf optimizers need population_size >= 3");

    RunTracker<Scalar> track(seed);
    auto pop = init_population(space, budget, seed);
    track.absorb(evaluate_population(pop, objective, 0, opts.workers));
    track.offer_all(pop);
    auto leaders = rank_leaders(pop);

    for (std::size_t it = 1; it <= budget.max_iterations; ++it) {
        const LeaderSchedule a = schedule(it - 1, budget.max_iterations);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            RngStream rng(seed, agent_stream(it, i));
            const auto& x = pop[i].position;
            const auto x1 = gwo_encircle(leaders.alpha.position, x, static_cast<Scalar>(a.a_alpha), rng);
            const auto x2 = gwo_encircle(leaders.beta.position, x, static_cast<Scalar>(a.a_beta), rng);
            const auto x3 = gwo_encircle(leaders.delta.position, x, static_cast<Scalar>(a.a_delta), rng);
            const Position<Scalar> next = (x1 + x2 + x3) / Scalar(3);
            pop[i].position = clamp_to_bounds(guard_magnitude(next, track.guard_counter()), space);
            pop[i].fitness.reset();
        }
        track.absorb(evaluate_population(pop, objective, it, opts.workers));
        for (const auto& wolf : pop)
            leaders.consider(wolf);
        track.offer_all(pop);
        track.record(pop);
    }
    return std::move(track).finish();
}

} // namespace detail

/// Improved GWO: separate exponential schedules for alpha, beta and delta.
template <typename Scalar>
OptResult<Scalar> igwo_optimize(const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                                const IgwoParams& params, const Budget& budget, std::uint64_t seed,
                                const RunOptions& opts = {})
{
    params.validate();
    return detail::grey_wolf_loop(objective, space, budget, seed, opts,
                                  [&](std::size_t i, std::size_t i_max) { return igwo_a_schedule(i, i_max, params); });
}

template <typename Scalar>
OptResult<Scalar> gwo_optimize(const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                               const Budget& budget, std::uint64_t seed, const RunOptions& opts = {})
{
    return detail::grey_wolf_loop(objective, space, budget, seed, opts,
                                  [](std::size_t i, std::size_t i_max) { return gwo_linear_schedule(i, i_max); });
}

} // namespace swdo

#endif
