#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Seedable 64-bit generator with named substreams. Substream k of a master
/// seed is independent of how many other substreams exist, so adding a source
/// to a scenario does not perturb the draws of the existing ones.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng substream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t s = master_seed ^ (0x9E3779B97F4A7C15ull * (stream_id + 1));
        detail::splitmix64(s);
        return Rng(detail::splitmix64(s));
    }

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Inversion sampling: -ln(1-U)/rate. U = 0 maps to 0, which is allowed.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

private:
    std::mt19937_64 gen_;
};

}  // namespace aoit
