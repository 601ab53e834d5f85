#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ksumforge/algebra.hpp"
#include "ksumforge/reductions.hpp"
#include "ksumforge/solvers.hpp"
#include "ksumforge/stats.hpp"

using namespace ksumforge;

namespace {

template <class Gen>
auto solvable(Gen gen, SeededRng& rng) {
    for (;;) {
        auto inst = gen(rng);
        if (brute_force(inst)) return inst;
    }
}

bool lifts_cleanly(const Instance& z, const ReductionReport& rep) {
    return !rep.outcome || validate(z, *rep.outcome);
}

// P(s1 + ... + sk = 0) for s_i uniform on the rounding residues of odd q, by enumeration.
double zero_sum_probability(std::size_t k, std::int64_t q) {
    std::vector<double> dist = {1.0};
    const std::int64_t h = (q - 1) / 2;
    std::int64_t offset = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> next(dist.size() + 2 * h, 0.0);
        for (std::size_t j = 0; j < dist.size(); ++j)
            for (std::int64_t s = -h; s <= h; ++s) next[j + s + h] += dist[j] / static_cast<double>(q);
        dist = std::move(next);
        offset += h;
    }
    return dist[offset];
}

}  // namespace

TEST_CASE("obfuscate_xor re-encodes through T and P") {
    SeededRng rng(1);
    for (int i = 0; i < 50; ++i) {
        const XorInstance z = gen_xor_instance(3, 12, 20, rng);
        const auto [x, obf] = obfuscate_xor(z, 8, rng);
        CHECK(obf.t() == 4);
        CHECK(f2_rank(obf.T) == 8);
        for (std::size_t j = 0; j < z.r(); ++j) CHECK(x.elements()[j] == obf.T.apply(z.elements()[obf.P(j)]));
    }
}

TEST_CASE("obfuscate_xor with m = n preserves solution sets") {
    SeededRng rng(2);
    for (int i = 0; i < 50; ++i) {
        const XorInstance z = solvable([](SeededRng& g) { return gen_xor_instance(3, 8, 16, g); }, rng);
        const auto [x, obf] = obfuscate_xor(z, 8, rng);
        const auto sol = brute_force(z);
        const Permutation inv = obf.P.inverse();
        std::vector<std::size_t> mapped;
        for (auto j : sol->indices()) mapped.push_back(inv(j));
        CHECK(validate(x, KTuple::from_indices(mapped)));
        CHECK(brute_force(x).has_value());
    }
}

TEST_CASE("xor_reduce with an honest brute-force oracle") {
    SeededRng rng(3);
    ReductionBudget budget;
    budget.iterations = 1u << 7;
    const Oracle oracle = lexmin_oracle(Family::kXor);
    int wins = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        const XorInstance z = solvable([](SeededRng& g) { return gen_xor_instance(3, 14, 64, g); }, rng);
        SeededRng run = rng.child(i);
        const auto rep = xor_reduce(z, 10, oracle, budget, run);
        CHECK(lifts_cleanly(z, rep));
        CHECK(rep.calls <= budget.iterations);
        wins += rep.outcome.has_value();
    }
    CHECK(wins >= trials / 2);
}

TEST_CASE("xor_reduce with an always-failing oracle spends exactly L calls") {
    SeededRng rng(4);
    ReductionBudget budget;
    budget.iterations = 37;
    const auto rep = xor_reduce(gen_xor_instance(3, 14, 64, rng), 10, always_fail_oracle(Family::kXor), budget, rng);
    CHECK_FALSE(rep.outcome);
    CHECK(rep.calls == 37);
    const auto pipe = xor_theorem_pipeline(gen_xor_instance(4, 20, 32, rng), 14, always_fail_oracle(Family::kXor),
                                           budget, rng);
    CHECK_FALSE(pipe.outcome);
    CHECK(pipe.calls == 37);
}

TEST_CASE("xor_reduce with m = n lifts every oracle success") {
    SeededRng rng(5);
    ReductionBudget budget;
    budget.iterations = 20;
    budget.run_all = true;
    for (int i = 0; i < 30; ++i) {
        const XorInstance z = gen_xor_instance(3, 10, 24, rng);
        const auto rep = xor_reduce(z, 10, lexmin_oracle(Family::kXor), budget, rng);
        CHECK(rep.lifted == rep.successes);
        CHECK(lifts_cleanly(z, rep));
    }
}

TEST_CASE("call cap bounds xor_reduce") {
    SeededRng rng(6);
    ReductionBudget budget;
    budget.iterations = 100;
    budget.call_cap = 9;
    const auto rep = xor_reduce(gen_xor_instance(3, 14, 64, rng), 10, always_fail_oracle(Family::kXor), budget, rng);
    CHECK(rep.calls == 9);
}

TEST_CASE("pad_reduce_xor") {
    SeededRng rng(7);
    const Oracle oracle = lexmin_oracle(Family::kXor);
    for (int i = 0; i < 100; ++i) {
        const XorInstance z = gen_xor_instance(2, 8, 32, rng);
        const auto rep = pad_reduce_xor(z, 1, oracle, rng);
        CHECK(rep.outcome.has_value() == brute_force(z).has_value());
    }

    // Acceptance with d = 2 against ((r-k)/(dr-k))^k times the oracle rate.
    const int trials = 1000;
    std::uint64_t accepted = 0, oracle_wins = 0;
    for (int i = 0; i < trials; ++i) {
        const XorInstance z = solvable([](SeededRng& g) { return gen_xor_instance(2, 8, 32, g); }, rng);
        const auto rep = pad_reduce_xor(z, 2, oracle, rng);
        CHECK(lifts_cleanly(z, rep));
        accepted += rep.outcome.has_value();
        oracle_wins += rep.successes;
    }
    const double bound = std::pow(30.0 / 62.0, 2) * static_cast<double>(oracle_wins) / trials;
    const double sigma = std::sqrt(bound * (1 - bound) / trials);
    CHECK(static_cast<double>(accepted) / trials >= bound - 3 * sigma);
}

TEST_CASE("padding bookkeeping") {
    SeededRng rng(8);
    const Instance z = gen_sum_instance(3, 1000, 10, rng);
    const Padding pad = make_padding(z, 40, rng);
    CHECK(list_size(pad.padded) == 40);
    const auto& orig = std::get<SumInstance>(z).elements();
    const auto& padded = std::get<SumInstance>(pad.padded).elements();
    for (std::size_t i = 0; i < 40; ++i)
        if (pad.perm(i) < 10) CHECK(padded[i] == orig[pad.perm(i)]);
    CHECK_THROWS_AS(pad_reduce_sum(gen_xor_instance(2, 4, 4, rng), 8, lexmin_oracle(Family::kXor), rng),
                    ParameterError);
}

TEST_CASE("obfuscate_msum maps zero to zero") {
    SeededRng rng(9);
    const MSumInstance z(3, 251 * 13, std::vector<std::uint64_t>(10, 0));
    for (int i = 0; i < 20; ++i) {
        const auto [y, obf] = obfuscate_msum(z, 251, 13, rng);
        for (auto v : y.elements()) CHECK(v == 0);
    }
    CHECK_THROWS_AS(obfuscate_msum(z, 13, 251, rng), ParameterError);
}

TEST_CASE("msum_reduce keeps going after unliftable oracle answers") {
    SeededRng rng(10);
    MSumInstance z = gen_msum_instance(3, 251 * 13, 8, rng);
    while (brute_force(z)) z = gen_msum_instance(3, 251 * 13, 8, rng);
    ReductionBudget budget;
    budget.iterations = 50;
    const auto rep = msum_reduce(z, 251, 13, lexmin_oracle(Family::kMSum), budget, rng);
    CHECK_FALSE(rep.outcome);
    CHECK(rep.calls == 50);
    CHECK(rep.successes > 0);
    CHECK(rep.lifted == 0);
}

TEST_CASE("msum_reduce lift rate given oracle success matches the rounding baseline") {
    // One round per fresh instance keeps the Bernoulli trials independent.
    for (auto [p, q] : {std::pair<std::uint64_t, std::uint64_t>{251, 13}, {11, 11}}) {
        SeededRng rng(11 + p);
        ReductionBudget budget;
        budget.iterations = 1;
        std::uint64_t successes = 0, lifted = 0;
        for (int i = 0; i < 20000; ++i) {
            const MSumInstance z = gen_msum_instance(3, p * q, 32, rng);
            const auto rep = msum_reduce(z, p, q, lexmin_oracle(Family::kMSum), budget, rng);
            CHECK(lifts_cleanly(z, rep));
            successes += rep.successes;
            lifted += rep.lifted;
        }
        const double baseline = zero_sum_probability(3, static_cast<std::int64_t>(q));
        CHECK(successes > 10000);
        CHECK(within_binomial_sigma(lifted, successes, baseline));
    }
}

TEST_CASE("default msum iterations") {
    CHECK(default_msum_iterations(0.25, 1.0, 13, 3) == 1);
    CHECK(default_msum_iterations(1.0, 1.0, 1000, 4) == 73);
}

TEST_CASE("sum_to_msum bridge") {
    SeededRng rng(12);
    CHECK(sum_to_msum_rprime(100, 401, 1000) == 11);

    // M = 2N + 1 keeps every element.
    const SumInstance z = gen_sum_instance(3, 100, 30, rng);
    const auto prep = prepare_sum_to_msum(z, 201, rng);
    REQUIRE(prep);
    CHECK(prep->survivors == 30);

    const Oracle oracle = lexmin_oracle(Family::kMSum);
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
        const SumInstance s = solvable([](SeededRng& g) { return gen_sum_instance(3, 10000, 400, g); }, rng);
        const auto rep = sum_to_msum(s, 2001, oracle, rng);
        CHECK(lifts_cleanly(s, rep));
        wins += rep.outcome.has_value();
    }
    CHECK(wins > 0);
}

TEST_CASE("sum_theorem_pipeline") {
    SeededRng rng(13);
    ReductionBudget budget;
    budget.call_cap = 25;
    const SumInstance z = gen_sum_instance(3, 1 << 12, 16, rng);
    const auto fail = sum_theorem_pipeline(z, 1 << 8, always_fail_oracle(Family::kSum), budget, rng);
    CHECK_FALSE(fail.outcome);
    CHECK(fail.calls == 25);

    // M = N: no prime q fits, the bridge works mod p directly.
    SolverConfig dense;
    dense.algorithm = Algorithm::kSortAndMatch;
    const Oracle oracle = solver_oracle(dense, Family::kSum);
    budget.call_cap = 60;
    int wins = 0;
    for (int i = 0; i < 20; ++i) {
        const SumInstance s = solvable([](SeededRng& g) { return gen_sum_instance(3, 1 << 12, 16, g); }, rng);
        SeededRng run = rng.child(i);
        const auto rep = sum_theorem_pipeline(s, 1 << 12, oracle, budget, run);
        CHECK(lifts_cleanly(s, rep));
        CHECK(rep.calls <= budget.call_cap);
        wins += rep.outcome.has_value();
    }
    CHECK(wins > 0);
    CHECK_THROWS_AS(sum_theorem_pipeline(z, 10, oracle, budget, rng), ParameterError);
}

TEST_CASE("seeded reductions are reproducible") {
    SeededRng gen(14);
    const XorInstance z = gen_xor_instance(3, 14, 64, gen);
    ReductionBudget budget;
    budget.iterations = 64;
    budget.run_all = true;
    SeededRng a(5), b(5);
    const auto ra = xor_reduce(z, 10, lexmin_oracle(Family::kXor), budget, a);
    const auto rb = xor_reduce(z, 10, lexmin_oracle(Family::kXor), budget, b);
    CHECK(ra.outcome == rb.outcome);
    CHECK(ra.successes == rb.successes);
    CHECK(ra.lifted == rb.lifted);
}
