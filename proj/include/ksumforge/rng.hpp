#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ksumforge {

/// SplitMix64 finalizer. Used to expand seeds and derive child streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic pseudorandom stream keyed by a 64-bit seed.
///
/// Single-owner: parallel code derives child streams with child(index)
/// instead of sharing one instance. Bounded draws use Lemire's multiply
/// and reject method so results do not depend on the standard library's
/// distribution implementations.
class SeededRng {
public:
    using result_type = std::uint64_t;

    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_word() { return engine_(); }

    /// Uniform on [0, bound). bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Uniform word with the low `width` bits random and the rest zero (width <= 64).
    std::uint64_t bits(unsigned width);

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Independent stream derived from (seed, index); does not advance this stream.
    SeededRng child(std::uint64_t index) const {
        return SeededRng(mix64(seed_ ^ mix64(index + 0x632BE59BD9B4E019ULL)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace ksumforge
