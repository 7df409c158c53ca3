#ifndef SWDO_MGTO_HPP
#define SWDO_MGTO_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swdo/core.hpp"

namespace swdo {

struct MgtoParams {
    double pp = 0.03;              ///< probability of a uniform restart during exploration
    double W = 0.8;                ///< C at or above W follows the silverback, below it competes
    double cauchy_location = 0.0;
    double cauchy_scale = 1.0;
    double tan_clamp = 1e3;

    void validate() const
    {
        if (!(pp >= 0.0 && pp <= 1.0 && W >= 0.0 && W <= 1.0))
            throw ConfigError("MgtoParams: pp and W must lie in [0, 1]");
        if (!(cauchy_scale > 0.0 && tan_clamp > 0.0))
            throw ConfigError("MgtoParams: cauchy_scale and tan_clamp must be positive");
    }
};

/// tan(pi * (p - 1/2)) with the magnitude capped.
inline double clamped_tangent(double p, double tan_clamp)
{
    const double t = std::tan(std::numbers::pi * (p - 0.5));
    return std::clamp(t, -tan_clamp, tan_clamp);
}

/// Inverse-CDF Cauchy draw for a given uniform p.
inline double cauchy_from_uniform(double p, double a, double b, double tan_clamp = 1e3)
{
    if (!(b > 0.0))
        throw ContractError("cauchy_sample: scale must be positive");
    return a + b * clamped_tangent(p, tan_clamp);
}

inline double cauchy_sample(double a, double b, RngStream& rng, double tan_clamp = 1e3)
{
    return cauchy_from_uniform(rng.uniform(), a, b, tan_clamp);
}

/// Per-iteration control values shared by every gorilla.
struct MgtoControl {
    double C;
    double L;
};

/// C = (cos(2 r4) + 1) (1 - it / max_it), L = C * l.
inline MgtoControl mgto_control(std::size_t it, std::size_t max_it, double r4, double l)
{
    if (it > max_it || max_it == 0)
        throw ContractError("mgto_control: iteration outside [0, max_it]");
    const double F = std::cos(2.0 * r4) + 1.0;
    const double C = F * (1.0 - static_cast<double>(it) / static_cast<double>(max_it));
    return {C, C * l};
}

/// Opposite point inside the population's per-dimension span:
/// F * (lo + hi) - x. Coordinates that leave [lo, hi] are redrawn uniformly in it.
template <typename Scalar>
Position<Scalar> eobl_opposite(const Position<Scalar>& x, const Array<Scalar>& pop_min, const Array<Scalar>& pop_max,
                               const SearchSpace<Scalar>& space, Scalar F, RngStream& rng)
{
    if (x.size() != pop_min.size() || x.size() != pop_max.size())
        throw ContractError("eobl_opposite: dimension mismatch");
    if (!(pop_min <= pop_max).all())
        throw ContractError("eobl_opposite: pop_min must not exceed pop_max");
    Position<Scalar> out = F * (pop_min + pop_max) - x;
    for (Eigen::Index d = 0; d < out.size(); ++d)
        if (out[d] < pop_min[d] || out[d] > pop_max[d])
            out[d] = std::clamp(pop_min[d] + (pop_max[d] - pop_min[d]) * static_cast<Scalar>(rng.uniform()),
                                pop_min[d], pop_max[d]);
    return clamp_to_bounds(out, space);
}

template <typename Scalar>
Position<Scalar> eobl_opposite(const Position<Scalar>& x, const Array<Scalar>& pop_min, const Array<Scalar>& pop_max,
                               const SearchSpace<Scalar>& space, RngStream& rng)
{
    const auto F = static_cast<Scalar>(rng.uniform());
    return eobl_opposite(x, pop_min, pop_max, space, F, rng);
}

/// Random values consumed by one exploitation move.
template <typename Scalar>
struct MgtoExploitDraws {
    double p;       ///< uniform feeding the Cauchy factor of the follow branch
    double r5;      ///< competition strength Q = 2 r5 - 1
    Array<Scalar> v; ///< per-dimension uniforms for tan(v pi)

    static MgtoExploitDraws draw(Eigen::Index dims, RngStream& rng)
    {
        MgtoExploitDraws d{rng.uniform(), rng.uniform(), {}};
        d.v = rng.uniform_array<Scalar>(dims);
        return d;
    }
};

/// Exploitation around the silverback. With C >= W the gorilla follows:
/// x + L * M * (x - silverback) * 0.01 * cauchy, where M = |population mean|.
/// Otherwise it competes: silverback - Q (silverback - x) tan(v pi).
template <typename Scalar>
Position<Scalar> mgto_exploit(const Position<Scalar>& x, const Position<Scalar>& silverback,
                              const Array<Scalar>& population_mean, const MgtoControl& ctl, const MgtoParams& params,
                              const MgtoExploitDraws<Scalar>& draws)
{
    if (x.size() != silverback.size() || x.size() != population_mean.size() || draws.v.size() != x.size())
        throw ContractError("mgto_exploit: dimension mismatch");
    if (ctl.C >= params.W) {
        const Array<Scalar> M = population_mean.abs();
        const auto factor =
            static_cast<Scalar>(0.01 * cauchy_from_uniform(draws.p, params.cauchy_location, params.cauchy_scale,
                                                           params.tan_clamp));
        return x + static_cast<Scalar>(ctl.L) * M * (x - silverback) * factor;
    }
    const auto Q = static_cast<Scalar>(2.0 * draws.r5 - 1.0);
    Array<Scalar> tangent(x.size());
    for (Eigen::Index d = 0; d < x.size(); ++d)
        tangent[d] = static_cast<Scalar>(std::clamp(std::tan(draws.v[d] * std::numbers::pi), -params.tan_clamp,
                                                    params.tan_clamp));
    return silverback - (silverback * Q - x * Q) * tangent;
}

template <typename Scalar>
Position<Scalar> mgto_exploit(const Position<Scalar>& x, const Position<Scalar>& silverback,
                              const Array<Scalar>& population_mean, const MgtoControl& ctl, const MgtoParams& params,
                              RngStream& rng)
{
    return mgto_exploit(x, silverback, population_mean, ctl, params,
                        MgtoExploitDraws<Scalar>::draw(x.size(), rng));
}

/// Exploration move: uniform restart with probability pp, otherwise a move
/// relative to a random troop member, then clamped into the space.
template <typename Scalar>
Position<Scalar> mgto_explore(const Position<Scalar>& x, const Position<Scalar>& random_member, const MgtoControl& ctl,
                              const SearchSpace<Scalar>& space, const MgtoParams& params, RngStream& rng)
{
    if (x.size() != random_member.size() || x.size() != space.dims())
        throw ContractError("mgto_explore: dimension mismatch");
    const auto C = static_cast<Scalar>(ctl.C);
    const auto L = static_cast<Scalar>(ctl.L);
    Position<Scalar> out;
    if (rng.uniform() < params.pp) {
        out = uniform_in_bounds(space, rng);
    } else if (rng.uniform() >= 0.5) {
        const auto r2 = static_cast<Scalar>(rng.uniform());
        Array<Scalar> Z(x.size());
        for (Eigen::Index d = 0; d < x.size(); ++d)
            Z[d] = static_cast<Scalar>(rng.uniform(-ctl.C, ctl.C));
        const Array<Scalar> H = Z * x;
        out = (r2 - C) * random_member + L * H;
    } else {
        const auto r3 = static_cast<Scalar>(rng.uniform());
        const Array<Scalar> diff = x - random_member;
        out = x - L * (L * diff + r3 * diff);
    }
    return clamp_to_bounds(out, space);
}

/// Modified Gorilla Troops Optimizer.
///
/// Per iteration each gorilla makes one exploration move followed by one
/// exploitation move, evaluated once and kept only if fitter. Every gorilla
/// then gets an elite-opposition point inside the troop's current span,
/// evaluated as an extra and kept only when strictly fitter. Total
/// evaluations: pop * (iters + 1) main plus pop * iters opposition extras.
template <typename Scalar>
OptResult<Scalar> mgto_optimize(const Objective<Scalar>& objective, const SearchSpace<Scalar>& space,
                                const MgtoParams& params, const Budget& budget, std::uint64_t seed,
                                const RunOptions& opts = {})
{
    params.validate();
    budget.validate();
    const auto n = budget.population_size;

    RunTracker<Scalar> track(seed);
    auto pop = init_population(space, budget, seed);
    track.absorb(evaluate_population(pop, objective, 0, opts.workers));
    track.offer_all(pop);

    for (std::size_t it = 1; it <= budget.max_iterations; ++it) {
        RngStream control_rng(seed, agent_stream(it, 0, 0x6011A));
        const double r4 = control_rng.uniform();
        const auto l = static_cast<double>(control_rng.uniform_int(-1, 1));
        const MgtoControl ctl = mgto_control(it, budget.max_iterations, r4, l);
        const Position<Scalar> silverback = track.best_position();

        Population<Scalar> cand(n);
        std::vector<RngStream> rngs;
        rngs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            rngs.emplace_back(seed, agent_stream(it, i));
            const auto r = static_cast<std::size_t>(rngs[i].uniform_int(0, static_cast<std::int64_t>(n) - 1));
            cand[i].position = mgto_explore(pop[i].position, pop[r].position, ctl, space, params, rngs[i]);
        }
        Array<Scalar> mean = Array<Scalar>::Zero(space.dims());
        for (const auto& c : cand)
            mean += c.position;
        mean /= static_cast<Scalar>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto moved = mgto_exploit(cand[i].position, silverback, mean, ctl, params, rngs[i]);
            cand[i].position = clamp_to_bounds(guard_magnitude(moved, track.guard_counter()), space);
        }
        track.absorb(evaluate_population(cand, objective, it, opts.workers));
        for (std::size_t i = 0; i < n; ++i)
            if (*cand[i].fitness < *pop[i].fitness)
                pop[i] = cand[i];
        track.offer_all(pop);

        Array<Scalar> lo = pop[0].position;
        Array<Scalar> hi = pop[0].position;
        for (const auto& g : pop) {
            lo = lo.min(g.position);
            hi = hi.max(g.position);
        }
        Population<Scalar> opp(n);
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(seed, agent_stream(it, i, 1));
            opp[i].position = eobl_opposite(pop[i].position, lo, hi, space, rng);
        }
        track.absorb(evaluate_population(opp, objective, it, 1, opts.workers, [](std::size_t) { return true; }));
        for (std::size_t i = 0; i < n; ++i)
            if (*opp[i].fitness < *pop[i].fitness)
                pop[i] = opp[i];
        track.offer_all(pop);
        track.record(pop);
    }
    return std::move(track).finish();
}

} // namespace swdo

#endif
