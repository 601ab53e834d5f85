#pragma once

// Exact random linear algebra over F_2, 63-bit modular arithmetic,
// primality, and the round-half-up integer division used by the
// arithmetic obfuscation.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ksumforge/core.hpp"

namespace ksumforge {

/// m x n matrix over F_2 with packed rows (m, n <= 63). Row i computes
/// output bit i of apply_f2.
class F2Matrix {
public:
    F2Matrix(unsigned cols, std::vector<std::uint64_t> rows);

    static F2Matrix identity(unsigned n);
    static F2Matrix zero(unsigned rows, unsigned cols);

    unsigned rows() const noexcept { return static_cast<unsigned>(rows_.size()); }
    unsigned cols() const noexcept { return cols_; }
    std::uint64_t row(unsigned i) const { return rows_.at(i); }
    const std::vector<std::uint64_t>& row_words() const noexcept { return rows_; }

    /// Image of a packed word; no width checks.
    std::uint64_t apply(std::uint64_t v) const noexcept;

    friend bool operator==(const F2Matrix&, const F2Matrix&) = default;

private:
    unsigned cols_;
    std::vector<std::uint64_t> rows_;
};

std::size_t f2_rank(const F2Matrix& m);

/// Uniform over rank-m matrices in F_2^{m x n}, by rejection from uniform matrices.
F2Matrix sample_full_rank(unsigned m, unsigned n, SeededRng& rng);

BitVec apply_f2(const F2Matrix& t, const BitVec& v);

/// A bijection on [0, size).
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> image);
    static Permutation identity(std::size_t size);

    std::size_t size() const noexcept { return image_.size(); }
    std::size_t operator()(std::size_t i) const { return image_[i]; }
    const std::vector<std::size_t>& image() const noexcept { return image_; }

    Permutation inverse() const;
    /// (this o other)(i) = this(other(i)).
    Permutation compose(const Permutation& other) const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::size_t> image_;
};

/// Fisher-Yates.
Permutation sample_permutation(std::size_t size, SeededRng& rng);

/// (a*b) mod L through a 128-bit intermediate. Requires a, b < L.
constexpr std::uint64_t mulmod_wide(std::uint64_t a, std::uint64_t b, std::uint64_t modulus) noexcept {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % modulus);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t modulus) noexcept;

/// Uniform over the units of Z_L, L >= 2.
std::uint64_t sample_unit(std::uint64_t modulus, SeededRng& rng);

/// Inverse of a modulo L by extended Euclid; throws ParameterError if gcd(a, L) != 1.
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t modulus);

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t x) noexcept;

/// Uniform candidates from [lo, hi) retested until prime. max_attempts = 0
/// selects the default cap of 64*log2(hi). Throws CapacityError on exhaustion.
std::uint64_t sample_prime(std::uint64_t lo, std::uint64_t hi, SeededRng& rng, std::uint64_t max_attempts = 0);

/// Smallest prime strictly greater than x.
std::uint64_t next_prime(std::uint64_t x);

/// The integer j in (w/q - 1/2, w/q + 1/2]; ties round up. q > 0.
constexpr std::int64_t round_div(std::int64_t w, std::int64_t q) noexcept {
    const __int128 num = static_cast<__int128>(w) * 2 + q;
    const __int128 den = static_cast<__int128>(q) * 2;
    __int128 quot = num / den;
    if ((num % den != 0) && (num < 0)) --quot;
    return static_cast<std::int64_t>(quot);
}

/// Representative of x (mod L) in (-L/2, L/2].
constexpr std::int64_t centered(std::uint64_t x, std::uint64_t modulus) noexcept {
    return x > modulus / 2 ? static_cast<std::int64_t>(x) - static_cast<std::int64_t>(modulus)
                           : static_cast<std::int64_t>(x);
}

/// Non-negative residue of a signed integer.
constexpr std::uint64_t reduce_signed(std::int64_t v, std::uint64_t modulus) noexcept {
    const __int128 r = static_cast<__int128>(v) % static_cast<__int128>(modulus);
    return static_cast<std::uint64_t>(r < 0 ? r + modulus : r);
}

/// Keys of the arithmetic obfuscation: alpha in Z_{pq}^*, gamma in Z_p^*.
struct SumObfuscationKeys {
    std::uint64_t alpha;
    std::uint64_t gamma;
    std::uint64_t p;
    std::uint64_t q;

    /// Throws ParameterError unless p, q are prime, p >= q, pq < 2^63 and the keys are units.
    void check() const;
    static SumObfuscationKeys sample(std::uint64_t p, std::uint64_t q, SeededRng& rng);
};

/// gamma * round(alpha*z mod pq / q) mod p for one element z of Z_{pq}.
std::uint64_t obfuscate_residue(const SumObfuscationKeys& keys, std::uint64_t z) noexcept;

}  // namespace ksumforge
