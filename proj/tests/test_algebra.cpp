#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <numeric>

#include "ksumforge/algebra.hpp"
#include "ksumforge/stats.hpp"

using namespace ksumforge;

namespace {

std::vector<bool> sieve(std::size_t n) {
    std::vector<bool> prime(n, true);
    prime[0] = false;
    if (n > 1) prime[1] = false;
    for (std::size_t i = 2; i * i < n; ++i)
        if (prime[i])
            for (std::size_t j = i * i; j < n; j += i) prime[j] = false;
    return prime;
}

// Rank by Gaussian elimination on an explicit bit matrix.
std::size_t rank_reference(std::vector<std::vector<int>> a) {
    std::size_t rank = 0;
    const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && !a[piv][c]) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != rank && a[r][c])
                for (std::size_t k = 0; k < cols; ++k) a[r][k] ^= a[rank][k];
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("f2_rank examples") {
    CHECK(f2_rank(F2Matrix::identity(3)) == 3);
    CHECK(f2_rank(F2Matrix::zero(2, 5)) == 0);
    CHECK(f2_rank(F2Matrix(3, {0b011, 0b110, 0b101})) == 2);
}

TEST_CASE("f2_rank agrees with explicit elimination") {
    SeededRng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const unsigned rows = 1 + static_cast<unsigned>(rng.uniform_below(8));
        const unsigned cols = 1 + static_cast<unsigned>(rng.uniform_below(8));
        std::vector<std::uint64_t> words;
        std::vector<std::vector<int>> bits(rows, std::vector<int>(cols));
        for (unsigned i = 0; i < rows; ++i) {
            words.push_back(rng.bits(cols));
            for (unsigned j = 0; j < cols; ++j) bits[i][j] = (words.back() >> j) & 1;
        }
        CHECK(f2_rank(F2Matrix(cols, words)) == rank_reference(bits));
    }
}

TEST_CASE("sample_full_rank") {
    SeededRng rng(2);
    CHECK(sample_full_rank(1, 1, rng) == F2Matrix(1, {1}));
    for (int i = 0; i < 200; ++i) CHECK(f2_rank(sample_full_rank(2, 4, rng)) == 2);

    // |GL_3(F_2)| by enumeration of all 512 matrices.
    std::uint64_t invertible = 0;
    for (std::uint64_t w = 0; w < 512; ++w)
        invertible += f2_rank(F2Matrix(3, {w & 7, (w >> 3) & 7, (w >> 6) & 7})) == 3;
    CHECK(invertible == 168);
    std::uint64_t accepted = 0;
    for (int i = 0; i < 10000; ++i)
        accepted += f2_rank(F2Matrix(3, {rng.bits(3), rng.bits(3), rng.bits(3)})) == 3;
    CHECK(within_binomial_sigma(accepted, 10000, 168.0 / 512.0));

    std::map<std::vector<std::uint64_t>, std::uint64_t> freq;
    for (int i = 0; i < 16800; ++i) ++freq[sample_full_rank(3, 3, rng).row_words()];
    CHECK(freq.size() == 168);
    std::vector<std::uint64_t> counts;
    for (auto& [_, c] : freq) counts.push_back(c);
    CHECK(chi_square_uniform(counts).p_value > 1e-3);
}

TEST_CASE("apply_f2") {
    CHECK(apply_f2(F2Matrix::identity(5), BitVec(5, 0b10110)) == BitVec(5, 0b10110));
    CHECK(apply_f2(F2Matrix(2, {0b11, 0b01}), BitVec(2, 0b10)) == BitVec(2, 0b01));
}

TEST_CASE("permutations") {
    SeededRng rng(3);
    CHECK(sample_permutation(1, rng) == Permutation::identity(1));
    std::map<std::vector<std::size_t>, std::uint64_t> freq;
    for (int i = 0; i < 60000; ++i) ++freq[sample_permutation(3, rng).image()];
    CHECK(freq.size() == 6);
    std::vector<std::uint64_t> counts;
    for (auto& [_, c] : freq) counts.push_back(c);
    CHECK(chi_square_uniform(counts).p_value > 1e-3);
    for (int i = 0; i < 50; ++i) {
        const Permutation p = sample_permutation(20, rng);
        CHECK(p.inverse().compose(p) == Permutation::identity(20));
    }
}

TEST_CASE("sample_unit") {
    SeededRng rng(4);
    for (int i = 0; i < 20; ++i) CHECK(sample_unit(2, rng) == 1);
    std::uint64_t ones = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto u = sample_unit(6, rng);
        CHECK((u == 1 || u == 5));
        ones += u == 1;
    }
    CHECK(within_binomial_sigma(ones, 10000, 0.5));
    for (int i = 0; i < 1000; ++i) CHECK(std::gcd(sample_unit(360, rng), 360ULL) == 1);
}

TEST_CASE("mod_inverse") {
    CHECK(mod_inverse(1, 17) == 1);
    CHECK(mod_inverse(5, 6) == 5);
    CHECK_THROWS_AS(mod_inverse(4, 6), ParameterError);
    SeededRng rng(5);
    const std::uint64_t p = 1'000'000'007;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t a = 1 + rng.uniform_below(p - 1);
        CHECK(mulmod_wide(a, mod_inverse(a, p), p) == 1);
    }
}

TEST_CASE("is_prime agrees with a sieve") {
    CHECK(is_prime(2));
    CHECK_FALSE(is_prime(1));
    const auto ref = sieve(10000);
    for (std::uint64_t x = 0; x < 10000; ++x) CHECK(is_prime(x) == ref[x]);
    CHECK(is_prime(9223372036854775783ULL));
    CHECK_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
}

TEST_CASE("sample_prime") {
    SeededRng rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto p = sample_prime(2, 4, rng);
        CHECK((p == 2 || p == 3));
        CHECK(sample_prime(90, 100, rng) == 97);
    }
    for (int i = 0; i < 1000; ++i) {
        const auto p = sample_prime(1'000'000, 2'000'000, rng);
        CHECK(is_prime(p));
        CHECK(p >= 1'000'000);
        CHECK(p < 2'000'000);
    }
    CHECK_THROWS_AS(sample_prime(24, 29, rng), CapacityError);
    CHECK(next_prime(13) == 17);
    CHECK(next_prime(1024) == 1031);
}

TEST_CASE("round_div") {
    CHECK(round_div(7, 3) == 2);
    CHECK(round_div(5, 2) == 3);
    CHECK(round_div(-1, 3) == 0);
    CHECK(round_div(-5, 2) == -2);
    for (std::int64_t w = -200; w <= 200; ++w)
        for (std::int64_t q = 1; q <= 9; ++q) {
            const std::int64_t j = round_div(w, q);
            // w/q - 1/2 < j <= w/q + 1/2, scaled by 2q.
            CHECK(2 * w - q < 2 * j * q);
            CHECK(2 * j * q <= 2 * w + q);
        }
}

TEST_CASE("mulmod_wide agrees with 128-bit arithmetic") {
    const std::uint64_t L = (1ULL << 63) - 25;
    CHECK(mulmod_wide(L - 1, L - 1, L) == 1);
    CHECK(mulmod_wide(0, 12345, L) == 0);
    SeededRng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t mod = (1ULL << 62) + rng.uniform_below(1ULL << 62);
        const std::uint64_t a = rng.uniform_below(mod), b = rng.uniform_below(mod);
        unsigned __int128 wide = 0;
        // Shift-and-add product, independent of the single multiply.
        unsigned __int128 acc = a;
        for (std::uint64_t bb = b; bb; bb >>= 1) {
            if (bb & 1) wide = (wide + acc) % mod;
            acc = (acc * 2) % mod;
        }
        CHECK(mulmod_wide(a, b, mod) == static_cast<std::uint64_t>(wide));
    }
}

TEST_CASE("centered and reduce_signed") {
    CHECK(centered(6, 7) == -1);
    CHECK(centered(3, 7) == 3);
    CHECK(centered(5, 10) == 5);
    CHECK(reduce_signed(-3, 7) == 4);
    CHECK(reduce_signed(-14, 7) == 0);
}

TEST_CASE("obfuscation keys") {
    SeededRng rng(8);
    const auto keys = SumObfuscationKeys::sample(251, 13, rng);
    CHECK_NOTHROW(keys.check());
    CHECK(std::gcd(keys.alpha, 251ULL * 13) == 1);
    CHECK(obfuscate_residue(keys, 0) == 0);
    CHECK_THROWS_AS(SumObfuscationKeys::sample(10, 3, rng), ParameterError);
    CHECK_THROWS_AS((SumObfuscationKeys{1, 1, 3, 5}.check()), ParameterError);
}
