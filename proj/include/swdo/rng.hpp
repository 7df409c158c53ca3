#ifndef SWDO_RNG_HPP
#define SWDO_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace swdo {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds a list of integers into one 64-bit key. Order matters.
inline constexpr std::uint64_t hash_combine(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (auto p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// Counter-based random stream.
///
/// The k-th draw is a pure function of (master_seed, stream_id, k), so two
/// streams built from the same pair replay the same sequence no matter which
/// thread owns them. Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : master_(master_seed), stream_(stream_id),
          key_(hash_combine({master_seed, stream_id}))
    {
    }

    std::uint64_t master_seed() const noexcept { return master_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t draws() const noexcept { return counter_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive). Slight modulo bias is
    /// irrelevant at the ranges used here.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>((*this)() % span);
    }

    template <typename Scalar = double>
    Eigen::Array<Scalar, Eigen::Dynamic, 1> uniform_array(Eigen::Index n)
    {
        Eigen::Array<Scalar, Eigen::Dynamic, 1> out(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out[i] = static_cast<Scalar>(uniform());
        return out;
    }

    /// A child stream whose identity is derived from this stream's identity.
    RngStream derive(std::uint64_t tag) const noexcept { return {master_, hash_combine({stream_, tag})}; }

private:
    std::uint64_t master_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream id for one agent's draws in one iteration of one algorithm phase.
inline constexpr std::uint64_t agent_stream(std::uint64_t iteration, std::uint64_t agent, std::uint64_t phase = 0) noexcept
{
    return hash_combine({iteration, agent, phase});
}

/// Fisher-Yates shuffle driven by `rng`; identical on every platform.
template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace swdo

#endif
