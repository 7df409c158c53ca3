#ifndef SWDO_CORE_HPP
#define SWDO_CORE_HPP

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swdo/parallel.hpp"
#include "swdo/rng.hpp"

namespace swdo {

/// Violated precondition of a public operation.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration (budget, parameters, names).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Position = Array<Scalar>;

/// Axis-aligned box; lower[d] < upper[d] in every dimension.
template <typename Scalar = double>
class SearchSpace {
public:
    SearchSpace(Array<Scalar> lower, Array<Scalar> upper)
        : lower_(std::move(lower)), upper_(std::move(upper))
    {
        if (lower_.size() == 0)
            throw ContractError("SearchSpace: dims must be positive");
        if (lower_.size() != upper_.size())
            throw ContractError("SearchSpace: bound arrays differ in length");
        if (!(lower_ < upper_).all())
            throw ContractError("SearchSpace: lower must be strictly below upper in every dimension");
    }

    static SearchSpace box(Eigen::Index dims, Scalar lo, Scalar hi)
    {
        return {Array<Scalar>::Constant(dims, lo), Array<Scalar>::Constant(dims, hi)};
    }

    Eigen::Index dims() const noexcept { return lower_.size(); }
    const Array<Scalar>& lower() const noexcept { return lower_; }
    const Array<Scalar>& upper() const noexcept { return upper_; }
    Array<Scalar> width() const { return upper_ - lower_; }

    bool contains(const Position<Scalar>& p) const
    {
        return p.size() == dims() && (p >= lower_).all() && (p <= upper_).all();
    }

private:
    Array<Scalar> lower_;
    Array<Scalar> upper_;
};

/// One member of a population. `fitness` is empty until evaluated.
template <typename Scalar = double>
struct Agent {
    Position<Scalar> position;
    std::optional<Scalar> fitness;

    bool evaluated() const noexcept { return fitness.has_value(); }
};

template <typename Scalar>
using Population = std::vector<Agent<Scalar>>;

struct Budget {
    std::size_t population_size = 30;
    std::size_t max_iterations = 500;

    void validate() const
    {
        if (population_size < 2)
            throw ConfigError("Budget: population_size must be >= 2");
        if (max_iterations < 1)
            throw ConfigError("Budget: max_iterations must be >= 1");
    }
};

/// Where an objective call sits in a run. Iteration 0 is the initial population.
struct EvalContext {
    std::size_t iteration = 0;
    std::size_t agent = 0;
    /// 0 for the main update, 1 for extra evaluations (opposition points).
    std::size_t phase = 0;
};

/// Objective to minimize. Accepts either f(position) or f(position, context).
/// Must be reentrant: it may be called concurrently from several workers.
template <typename Scalar = double>
class Objective {
public:
    using Fn = std::function<Scalar(const Position<Scalar>&, const EvalContext&)>;

    template <typename F>
        requires std::invocable<const F&, const Position<Scalar>&, const EvalContext&>
    Objective(F f) : fn_(std::move(f))
    {
    }

    template <typename F>
        requires(std::invocable<const F&, const Position<Scalar>&> &&
                 !std::invocable<const F&, const Position<Scalar>&, const EvalContext&>)
    Objective(F f)
        : fn_([g = std::move(f)](const Position<Scalar>& x, const EvalContext&) { return static_cast<Scalar>(g(x)); })
    {
    }

    Scalar operator()(const Position<Scalar>& x, const EvalContext& ctx = {}) const { return fn_(x, ctx); }

private:
    Fn fn_;
};

struct IterationRecord {
    double best = 0.0; ///< best-so-far fitness after the iteration
    double mean = 0.0; ///< mean population fitness after the iteration
};

template <typename Scalar = double>
struct OptResult {
    Position<Scalar> best_position;
    Scalar best_fitness = std::numeric_limits<Scalar>::infinity();
    std::vector<IterationRecord> history;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
    /// Objective calls that returned a non-finite value or threw.
    std::size_t nonfinite_evaluations = 0;
    /// Intermediate update values clamped by the magnitude guard.
    std::size_t guarded_values = 0;

    friend bool operator==(const OptResult& a, const OptResult& b)
    {
        auto same_hist = a.history.size() == b.history.size();
        for (std::size_t i = 0; same_hist && i < a.history.size(); ++i)
            same_hist = a.history[i].best == b.history[i].best &&
                        (a.history[i].mean == b.history[i].mean ||
                         (std::isnan(a.history[i].mean) && std::isnan(b.history[i].mean)));
        return same_hist && a.best_position.size() == b.best_position.size() &&
               (a.best_position == b.best_position).all() && a.best_fitness == b.best_fitness &&
               a.evaluations == b.evaluations && a.seed == b.seed &&
               a.nonfinite_evaluations == b.nonfinite_evaluations && a.guarded_values == b.guarded_values;
    }
};

/// Execution knobs that never change results.
struct RunOptions {
    std::size_t workers = 1;
};

/// Projects p onto the box. In-bounds coordinates are returned untouched.
template <typename Scalar>
Position<Scalar> clamp_to_bounds(const Position<Scalar>& p, const SearchSpace<Scalar>& s)
{
    if (p.size() != s.dims())
        throw ContractError("clamp_to_bounds: position has " + std::to_string(p.size()) +
                            " coordinates, space has " + std::to_string(s.dims()));
    return p.max(s.lower()).min(s.upper());
}

template <typename Scalar>
Position<Scalar> uniform_in_bounds(const SearchSpace<Scalar>& s, RngStream& rng)
{
    Position<Scalar> p(s.dims());
    for (Eigen::Index d = 0; d < s.dims(); ++d)
        p[d] = s.lower()[d] + (s.upper()[d] - s.lower()[d]) * static_cast<Scalar>(rng.uniform());
    // (hi - lo) * u can round up to hi - lo + ulp for u close to 1.
    return clamp_to_bounds(p, s);
}

/// Uniform initial population; every agent unevaluated.
template <typename Scalar>
Population<Scalar> init_population(const SearchSpace<Scalar>& s, const Budget& b, RngStream& rng)
{
    b.validate();
    Population<Scalar> pop;
    pop.reserve(b.population_size);
    for (std::size_t i = 0; i < b.population_size; ++i)
        pop.push_back({uniform_in_bounds(s, rng), std::nullopt});
    return pop;
}

/// Convenience overload deriving the initialization stream from a seed.
template <typename Scalar>
Population<Scalar> init_population(const SearchSpace<Scalar>& s, const Budget& b, std::uint64_t seed)
{
    RngStream rng(seed, agent_stream(0, 0, 0xA11CE));
    return init_population(s, b, rng);
}

struct EvalStats {
    std::size_t evaluations = 0;
    std::size_t nonfinite = 0;
};

/// Evaluates every agent that `select(i)` accepts (all by default). Agent order
/// is preserved and results do not depend on `workers`. Non-finite or throwing
/// objectives map to +inf and bump `nonfinite`.
template <typename Scalar, typename Select>
EvalStats evaluate_population(Population<Scalar>& agents, const Objective<Scalar>& objective, std::size_t iteration,
                              std::size_t phase, std::size_t workers, Select&& select)
{
    std::vector<char> bad(agents.size(), 0);
    std::vector<char> done(agents.size(), 0);
    parallel_for(agents.size(), workers, [&](std::size_t i) {
        if (!select(i))
            return;
        Scalar f;
        try {
            f = objective(agents[i].position, EvalContext{iteration, i, phase});
        } catch (const std::exception&) {
            f = std::numeric_limits<Scalar>::quiet_NaN();
        }
        if (!std::isfinite(f)) {
            f = std::numeric_limits<Scalar>::infinity();
            bad[i] = 1;
        }
        agents[i].fitness = f;
        done[i] = 1;
    });
    EvalStats st;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        st.evaluations += static_cast<std::size_t>(done[i]);
        st.nonfinite += static_cast<std::size_t>(bad[i]);
    }
    return st;
}

template <typename Scalar>
EvalStats evaluate_population(Population<Scalar>& agents, const Objective<Scalar>& objective,
                              std::size_t iteration = 0, std::size_t workers = 1)
{
    return evaluate_population(agents, objective, iteration, 0, workers, [](std::size_t) { return true; });
}

template <typename Scalar>
double mean_fitness(const Population<Scalar>& pop)
{
    double sum = 0.0;
    for (const auto& a : pop)
        sum += static_cast<double>(a.fitness.value_or(std::numeric_limits<Scalar>::infinity()));
    return pop.empty() ? 0.0 : sum / static_cast<double>(pop.size());
}

/// Index of the fittest agent; ties resolve to the lowest index.
template <typename Scalar>
std::size_t best_index(const Population<Scalar>& pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (*pop[i].fitness < *pop[best].fitness)
            best = i;
    return best;
}

/// Caps |value| at `limit`, counting each intervention. NaN maps to 0.
template <typename Scalar>
Scalar guard_magnitude(Scalar value, std::size_t& counter, Scalar limit = Scalar(1e12))
{
    if (std::isnan(value)) {
        ++counter;
        return Scalar(0);
    }
    if (std::abs(value) > limit) {
        ++counter;
        return std::copysign(limit, value);
    }
    return value;
}

template <typename Scalar>
Array<Scalar> guard_magnitude(const Array<Scalar>& values, std::size_t& counter, Scalar limit = Scalar(1e12))
{
    Array<Scalar> out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out[i] = guard_magnitude(values[i], counter, limit);
    return out;
}

/// Shared bookkeeping for the optimizer loops: best-so-far tracking and history.
template <typename Scalar>
class RunTracker {
public:
    explicit RunTracker(std::uint64_t seed) { result_.seed = seed; }

    void absorb(const EvalStats& st)
    {
        result_.evaluations += st.evaluations;
        result_.nonfinite_evaluations += st.nonfinite;
    }

    void offer(const Agent<Scalar>& a)
    {
        if (a.fitness && (result_.best_position.size() == 0 || *a.fitness < result_.best_fitness)) {
            result_.best_fitness = *a.fitness;
            result_.best_position = a.position;
        }
    }

    void offer_all(const Population<Scalar>& pop)
    {
        for (const auto& a : pop)
            offer(a);
    }

    void record(const Population<Scalar>& pop)
    {
        result_.history.push_back({static_cast<double>(result_.best_fitness), mean_fitness(pop)});
    }

    std::size_t& guard_counter() noexcept { return result_.guarded_values; }
    const Position<Scalar>& best_position() const noexcept { return result_.best_position; }
    Scalar best_fitness() const noexcept { return result_.best_fitness; }

    OptResult<Scalar> finish() && { return std::move(result_); }

private:
    OptResult<Scalar> result_;
};

} // namespace swdo

#endif
