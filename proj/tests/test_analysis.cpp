#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "ksumforge/algebra.hpp"
#include "ksumforge/analysis.hpp"
#include "ksumforge/solvers.hpp"
#include "ksumforge/stats.hpp"

using namespace ksumforge;

namespace {

std::uint64_t quadruples_reference(std::uint64_t q, bool sum, std::uint64_t N) {
    std::uint64_t n = 0;
    for (std::uint64_t a = 0; a < q; ++a)
        for (std::uint64_t b = 0; b < q; ++b)
            for (std::uint64_t c = 0; c < q; ++c)
                for (std::uint64_t d = 0; d < q; ++d) n += sum ? (a * b + c * d == N) : (a * b == c * d);
    return n;
}

std::uint64_t element(const Instance& inst, std::size_t i) {
    return std::visit([&](const auto& in) { return static_cast<std::uint64_t>(in.elements()[i]); }, inst);
}

}  // namespace

TEST_CASE("wilson interval and normal quantile") {
    CHECK(normal_quantile_two_sided(0.99) == doctest::Approx(2.5758293).epsilon(1e-6));
    CHECK(normal_quantile_two_sided(0.95) == doctest::Approx(1.9599640).epsilon(1e-6));
    const Interval ci = wilson_interval(10, 100, 0.95);
    CHECK(ci.lo == doctest::Approx(0.0552).epsilon(1e-3));
    CHECK(ci.hi == doctest::Approx(0.1744).epsilon(1e-3));
    const Interval zero = wilson_interval(0, 50);
    CHECK(zero.lo == 0);
    CHECK(zero.hi > 0);
}

TEST_CASE("chi-square tail probabilities") {
    // 20 heads, 80 tails: statistic 36 on one degree of freedom.
    const ChiSquare c = chi_square_uniform({20, 80});
    CHECK(c.statistic == doctest::Approx(36.0));
    CHECK(c.dof == 1);
    CHECK(c.p_value == doctest::Approx(1.97e-9).epsilon(0.01));
    const ChiSquare f = chi_square_fit({30, 70}, {0.3, 0.7});
    CHECK(f.statistic == doctest::Approx(0.0));
    CHECK(f.p_value == doctest::Approx(1.0));
    CHECK(chi_square_two_sample({50, 50, 0}, {50, 50, 0}).p_value == doctest::Approx(1.0));
}

TEST_CASE("mrt sampler with t = 0 has uniform marginals") {
    SeededRng rng(1);
    std::vector<std::uint64_t> hx(16, 0), hy(16, 0);
    for (int i = 0; i < 20000; ++i) {
        const PairSample s = sample_mrt(2, 4, 2, 0, rng);
        ++hx[element(s.x, 0)];
        ++hy[element(s.y, 0)];
    }
    CHECK(chi_square_uniform(hx).p_value > 1e-3);
    CHECK(chi_square_uniform(hy).p_value > 1e-3);
}

TEST_CASE("mrt sampler matches exhaustive enumeration at m = t = 1") {
    // z in F_2^2, two maps from the three full-rank 1x2 rows.
    std::vector<double> exact(4, 0.0);
    for (std::uint64_t z = 0; z < 4; ++z)
        for (std::uint64_t r1 = 1; r1 < 4; ++r1)
            for (std::uint64_t r2 = 1; r2 < 4; ++r2) {
                const auto x = static_cast<std::uint64_t>(__builtin_parity(z & r1));
                const auto y = static_cast<std::uint64_t>(__builtin_parity(z & r2));
                exact[x * 2 + y] += 1.0 / 36.0;
            }
    SeededRng rng(2);
    std::vector<std::uint64_t> obs(4, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const PairSample s = sample_mrt(2, 1, 2, 1, rng);
        ++obs[element(s.x, 0) * 2 + element(s.y, 0)];
    }
    for (int c = 0; c < 4; ++c) CHECK(within_binomial_sigma(obs[c], draws, exact[c]));
    CHECK(chi_square_fit(obs, exact).p_value > 1e-3);
}

TEST_CASE("pqr samplers agree with each other") {
    SeededRng rng(3);
    const std::uint64_t p = 5, q = 3;
    std::vector<std::uint64_t> def(p * p * p * p, 0), claim(p * p * p * p, 0);
    auto index = [&](const PairSample& s) {
        return ((element(s.x, 0) * p + element(s.x, 1)) * p + element(s.y, 0)) * p + element(s.y, 1);
    };
    for (int i = 0; i < 100000; ++i) {
        ++def[index(sample_pqr(2, p, q, 2, PqrMode::kDefinition, rng))];
        ++claim[index(sample_pqr(2, p, q, 2, PqrMode::kClaim, rng))];
    }
    CHECK(chi_square_two_sample(def, claim).p_value > 1e-3);
    CHECK(sigma_min(4) == -2);
    CHECK(sigma_max(4) == 1);
    CHECK(sigma_min(5) == -2);
    CHECK(sigma_max(5) == 2);
}

TEST_CASE("collision estimates") {
    SeededRng rng(4);
    const auto none = estimate_collision(always_fail_oracle(Family::kXor), XorPairSpec{3, 10, 64, 4}, 200, rng);
    CHECK(none.collisions == 0);
    CHECK(none.paper_bound == doctest::Approx(1.0 / 64));

    // t = 0 and r = k: the whole list is the only candidate, so both calls agree.
    const auto full = estimate_collision(lexmin_oracle(Family::kXor), XorPairSpec{2, 2, 2, 0}, 2000, rng);
    CHECK(full.collisions == full.both_successes);
    CHECK(full.both_successes == full.x_successes);
    CHECK(within_binomial_sigma(full.x_successes, 2000, 0.25));

    const auto a = estimate_collision(lexmin_oracle(Family::kXor), XorPairSpec{3, 10, 64, 4}, 500, rng, 1);
    const auto b = estimate_collision(lexmin_oracle(Family::kXor), XorPairSpec{3, 10, 64, 4}, 500, rng, 4);
    CHECK(a.collisions == b.collisions);
    CHECK(a.x_successes == b.x_successes);
}

TEST_CASE("magnitude of the trivial character is one") {
    const Character zero{{0, 0}, 3};
    CHECK(magnitude_exact(zero, 2).value == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pinned magnitudes at p = 3, q = 2, r = 2") {
    // Values from exhaustive enumeration.
    CHECK(magnitude_exact({{1, 0}, 3}, 2).value == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(magnitude_exact({{0, 1}, 3}, 2).value == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(magnitude_exact({{1, 1}, 3}, 2).value == doctest::Approx(0.21875).epsilon(1e-15));
    CHECK(magnitude_exact({{1, 2}, 3}, 2).value == doctest::Approx(0.3125).epsilon(1e-15));
    const Fraction f = joint_zero_probability({{1, 0}, 3}, 2);
    CHECK(f.num * 4 == f.den);
}

TEST_CASE("magnitude identities") {
    for (auto [p, q, r] : {std::tuple<std::uint64_t, std::uint64_t, std::size_t>{3, 2, 2}, {5, 3, 2}}) {
        for (const Character& S : projective_representatives(p, r)) {
            const MagnitudeResult m = magnitude_exact(S, q);
            CHECK(std::abs(m.imag) < 1e-9);
            CHECK(std::abs(magnitude_from_probability(S, q) - m.value) < 1e-12);
            for (const Character& S2 : projective_representatives(p, r)) {
                const auto cross = magnitude_cross(S, S2, q);
                if (proportional(S, S2)) CHECK(std::abs(cross.real() - m.value) < 1e-12);
                else CHECK(std::abs(cross) < 1e-12);
            }
            Character scaled = S;
            for (auto& v : scaled.S) v = v * 2 % p;
            CHECK(std::abs(magnitude_cross(S, scaled, q).real() - m.value) < 1e-12);
        }
    }
}

TEST_CASE("projective representatives") {
    CHECK(projective_representatives(3, 2).size() == 4);
    CHECK(projective_representatives(5, 3).size() == 31);
    CHECK(proportional({{1, 2}, 5}, {{3, 1}, 5}));
    CHECK_FALSE(proportional({{1, 0}, 3}, {{0, 1}, 3}));
}

TEST_CASE("magnitude scan within slack") {
    const MagnitudeScan scan = magnitude_bound_scan(3, 2, 2);
    CHECK(scan.rows.size() == 4);
    CHECK(scan.within());
    CHECK(scan.max_scaled == doctest::Approx(1.875));
    CHECK(magnitude_terms(3, 2, 2) == 36 * 4 * 4);
    CHECK_THROWS_AS(magnitude_exact({{1, 1, 1, 1}, 7}, 5, 1000), CapacityError);
}

TEST_CASE("quadruple counts") {
    CHECK(count_quadruples(2, QuadMode::kProduct) == 10);
    CHECK(count_quadruples(2, QuadMode::kSum, 1) == 6);
    CHECK(quadruples_reference(2, false, 0) == 10);
    CHECK(quadruples_reference(2, true, 1) == 6);
    for (std::uint64_t q = 2; q <= 12; ++q) {
        CHECK(count_quadruples(q, QuadMode::kProduct) == quadruples_reference(q, false, 0));
        const std::uint64_t N = q * next_prime(q);
        CHECK(count_quadruples(q, QuadMode::kSum, N) == quadruples_reference(q, true, N));
        CHECK(count_quadruples(q, QuadMode::kSum, q + 3) == quadruples_reference(q, true, q + 3));
    }
}

TEST_CASE("aligned sum statistics") {
    CHECK(z_alpha_size(1, 7, 5) == 5);
    SeededRng rng(5);
    const AlignedStats tiny = aligned_sum_stats(3, 2, 0, rng);
    CHECK(tiny.trials == 0);
    CHECK(tiny.max <= 2);
    const AlignedStats wide = aligned_sum_stats(997, 3, 2000, rng);
    CHECK(wide.mean <= 2);
    const AlignedStats equal = aligned_sum_stats(13, 13, 0, rng);
    CHECK(equal.mean >= 1);
    CHECK(std::isfinite(equal.second_moment));
}
