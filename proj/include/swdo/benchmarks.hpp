#ifndef SWDO_BENCHMARKS_HPP
#define SWDO_BENCHMARKS_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "swdo/core.hpp"

namespace swdo {

template <typename Derived>
typename Derived::Scalar sphere(const Eigen::ArrayBase<Derived>& x)
{
    return x.square().sum();
}

template <typename Derived>
typename Derived::Scalar rastrigin(const Eigen::ArrayBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    const S two_pi = S(2) * std::numbers::pi_v<S>;
    return S(10) * S(x.size()) + (x.square() - S(10) * (two_pi * x).cos()).sum();
}

template <typename Derived>
typename Derived::Scalar rosenbrock(const Eigen::ArrayBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    if (x.size() < 2)
        throw ContractError("rosenbrock needs at least 2 dimensions");
    const auto n = x.size() - 1;
    const auto head = x.head(n);
    const auto tail = x.tail(n);
    return (S(100) * (tail - head.square()).square() + (S(1) - head).square()).sum();
}

template <typename Derived>
typename Derived::Scalar ackley(const Eigen::ArrayBase<Derived>& x)
{
    using S = typename Derived::Scalar;
    const S n = S(x.size());
    const S two_pi = S(2) * std::numbers::pi_v<S>;
    const S a = S(-20) * std::exp(S(-0.2) * std::sqrt(x.square().sum() / n));
    const S b = -std::exp((two_pi * x).cos().sum() / n);
    return a + b + S(20) + std::numbers::e_v<S>;
}

inline constexpr std::array<std::string_view, 4> benchmark_names{"sphere", "rastrigin", "rosenbrock", "ackley"};

inline bool is_benchmark(std::string_view name)
{
    for (auto n : benchmark_names)
        if (n == name)
            return true;
    return false;
}

template <typename Scalar>
Scalar benchmark(std::string_view name, const Position<Scalar>& x)
{
    if (x.size() < 1)
        throw ContractError("benchmark: empty position");
    if (name == "sphere")
        return sphere(x);
    if (name == "rastrigin")
        return rastrigin(x);
    if (name == "rosenbrock")
        return rosenbrock(x);
    if (name == "ackley")
        return ackley(x);
    throw ConfigError("unknown benchmark '" + std::string(name) + "'");
}

/// Conventional search box for each benchmark.
template <typename Scalar = double>
SearchSpace<Scalar> benchmark_space(std::string_view name, Eigen::Index dims)
{
    if (name == "sphere")
        return SearchSpace<Scalar>::box(dims, -100, 100);
    if (name == "rastrigin")
        return SearchSpace<Scalar>::box(dims, Scalar(-5.12), Scalar(5.12));
    if (name == "rosenbrock")
        return SearchSpace<Scalar>::box(dims, -30, 30);
    if (name == "ackley")
        return SearchSpace<Scalar>::box(dims, Scalar(-32.768), Scalar(32.768));
    throw ConfigError("unknown benchmark '" + std::string(name) + "'");
}

template <typename Scalar = double>
Objective<Scalar> benchmark_objective(std::string_view name)
{
    if (!is_benchmark(name))
        throw ConfigError("unknown benchmark '" + std::string(name) + "'");
    return Objective<Scalar>([n = std::string(name)](const Position<Scalar>& x) { return benchmark(n, x); });
}

} // namespace swdo

#endif
