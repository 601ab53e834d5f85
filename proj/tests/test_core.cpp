#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "ksumforge/core.hpp"
#include "ksumforge/solvers.hpp"
#include "ksumforge/stats.hpp"

using namespace ksumforge;

TEST_CASE("instance invariants") {
    CHECK_THROWS_AS(XorInstance(3, 8, {0x0f, 0xa3}), ParameterError);
    CHECK_THROWS_AS(XorInstance(2, 4, {0x1f, 0x01}), ParameterError);
    CHECK_THROWS_AS(SumInstance(2, 5, {6, 0}), ParameterError);
    CHECK_THROWS_AS(MSumInstance(2, 7, {7, 0}), ParameterError);
    CHECK_NOTHROW(MSumInstance(2, 1, {0, 0}));
}

TEST_CASE("ktuple canonical form") {
    const KTuple t = KTuple::from_indices({4, 1, 3});
    CHECK(t.indices() == std::vector<std::size_t>{1, 3, 4});
    CHECK_THROWS_AS(KTuple::from_indices({1, 1}), InvalidTuple);
    CHECK_THROWS_AS(KTuple::from_indices({}), InvalidTuple);
}

TEST_CASE("validate examples") {
    const Instance x = XorInstance(4, 4, {0b0001, 0b0010, 0b0100, 0b0111});
    CHECK(validate(x, KTuple::from_indices({0, 1, 2, 3})));

    const Instance s = SumInstance(3, 10, {-3, 1, 2, 5});
    CHECK(validate(s, KTuple::from_indices({0, 1, 2})));
    CHECK_FALSE(validate(s, KTuple::from_indices({0, 1, 3})));
    CHECK_THROWS_AS(validate(s, KTuple::from_indices({0, 1})), InvalidTuple);
    CHECK_THROWS_AS(validate(s, KTuple::from_indices({0, 1, 4})), InvalidTuple);

    const Instance m = MSumInstance(3, 10, {2, 3, 5});
    CHECK(validate(m, KTuple::from_indices({0, 1, 2})));
}

TEST_CASE("checked_oracle filters bad outputs") {
    SeededRng rng(1);
    const Instance inst = XorInstance(2, 4, {1, 2, 3});
    const Oracle fixed({"fixed", Family::kXor}, [](const Instance&, SeededRng&) -> OracleOutcome {
        return KTuple::from_indices({0, 1});
    });
    CHECK_FALSE(checked_oracle(fixed)(inst, rng).has_value());

    const Oracle dup({"dup", Family::kXor}, [](const Instance&, SeededRng&) -> OracleOutcome {
        return KTuple::from_indices({0, 0});
    });
    CHECK_FALSE(checked_oracle(dup)(inst, rng).has_value());

    const Instance solvable = XorInstance(2, 4, {5, 1, 5});
    const OracleOutcome direct = brute_force(solvable);
    REQUIRE(direct);
    CHECK(checked_oracle(lexmin_oracle(Family::kXor))(solvable, rng) == direct);
    CHECK_FALSE(always_fail_oracle(Family::kXor)(solvable, rng).has_value());
}

TEST_CASE("xor generator at n = 1 is fair") {
    SeededRng rng(11);
    std::uint64_t ones = 0, total = 0;
    for (int i = 0; i < 2500; ++i) {
        const auto inst = gen_xor_instance(4, 1, 4, rng);
        for (auto v : inst.elements()) {
            ones += v;
            ++total;
        }
    }
    CHECK(within_binomial_sigma(ones, total, 0.5));
}

TEST_CASE("xor generator range at n = 63") {
    SeededRng rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto inst = gen_xor_instance(2, 63, 2, rng);
        for (auto v : inst.elements()) CHECK(v < (1ULL << 63));
    }
}

TEST_CASE("xor generator byte histogram is uniform") {
    SeededRng rng(3);
    std::vector<std::uint64_t> hist(256, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto inst = gen_xor_instance(3, 8, 100, rng);
        for (auto v : inst.elements()) ++hist[v];
    }
    CHECK(chi_square_uniform(hist).p_value > 1e-3);
}

TEST_CASE("sum generator") {
    SeededRng rng(4);
    const auto three = gen_sum_instance(3, 1, 100000, rng);
    std::map<std::int64_t, std::uint64_t> freq;
    for (auto v : three.elements()) ++freq[v];
    CHECK(freq.size() == 3);
    for (auto [v, c] : freq) CHECK(within_binomial_sigma(c, 100000, 1.0 / 3));

    const auto huge = gen_sum_instance(3, 1LL << 61, 4, rng);
    for (auto v : huge.elements()) CHECK(std::llabs(v) <= (1LL << 61));

    const auto wide = gen_sum_instance(4, 100, 100000, rng);
    double sum = 0;
    for (auto v : wide.elements()) sum += static_cast<double>(v);
    const double mean = sum / 100000;
    const double sigma = std::sqrt((100.0 * 101.0 / 3.0) / 100000);
    CHECK(std::abs(mean) <= 3 * sigma);
}

TEST_CASE("msum generator") {
    SeededRng rng(5);
    const auto bits = gen_msum_instance(3, 2, 100000, rng);
    std::uint64_t ones = 0;
    for (auto v : bits.elements()) ones += v;
    CHECK(within_binomial_sigma(ones, 100000, 0.5));

    const auto seven = gen_msum_instance(4, 7, 70000, rng);
    std::vector<std::uint64_t> hist(7, 0);
    for (auto v : seven.elements()) ++hist[v];
    CHECK(chi_square_uniform(hist).p_value > 1e-3);

    const auto trivial = gen_msum_instance(2, 1, 5, rng);
    for (auto v : trivial.elements()) CHECK(v == 0);
}

TEST_CASE("child streams are reproducible and distinct") {
    const SeededRng a(99);
    SeededRng c1 = a.child(3), c2 = a.child(3), c3 = a.child(4);
    const auto v1 = c1.next_word();
    CHECK(v1 == c2.next_word());
    CHECK(v1 != c3.next_word());
}

TEST_CASE("uniform_below is unbiased on a small range") {
    SeededRng rng(6);
    std::vector<std::uint64_t> hist(6, 0);
    for (int i = 0; i < 60000; ++i) ++hist[rng.uniform_below(6)];
    CHECK(chi_square_uniform(hist).p_value > 1e-3);
}
