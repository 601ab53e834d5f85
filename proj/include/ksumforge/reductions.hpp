#pragma once

// Obfuscation algorithms, padding reductions, the SUM to MSUM bridge and the
// two end-to-end sparse-to-dense pipelines. Everything is generic over Oracle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ksumforge/algebra.hpp"
#include "ksumforge/core.hpp"

namespace ksumforge {

struct XorObfuscation {
    F2Matrix T;
    Permutation P;
    /// t = n - m.
    unsigned t() const noexcept { return T.cols() - T.rows(); }
};

struct SumObfuscation {
    SumObfuscationKeys keys;
    Permutation P;
};

struct ReductionBudget {
    /// L. Zero selects the reduction's default formula.
    std::uint64_t iterations = 0;
    /// Assumed oracle success probability. Unset means a pilot estimate from
    /// 32 direct calls on fresh dense instances.
    std::optional<double> beta_hint;
    /// Total oracle calls allowed; zero means unlimited.
    std::uint64_t call_cap = 0;
    /// Wall-clock cap in milliseconds; zero means unlimited.
    double wall_ms_cap = 0;
    /// Keep iterating after the first success (counters cover all L iterations).
    bool run_all = false;
};

struct ReductionReport {
    OracleOutcome outcome;
    std::uint64_t calls = 0;       // oracle invocations
    std::uint64_t successes = 0;   // invocations that returned a valid tuple
    std::uint64_t candidates = 0;  // lifted tuples tested against the input
    std::uint64_t lifted = 0;      // candidates that solved the input
    std::uint64_t attempts = 0;    // pipeline attempts (fresh primes, masks, padding)
    std::uint64_t pilot_calls = 0;
    double wall_ms = 0;
    std::uint64_t p = 0;
    std::uint64_t q = 0;
    std::string note;

    void absorb(const ReductionReport& inner);
};

/// Extra acceptance test applied to lifted candidates (in input indices).
using LiftFilter = std::function<bool(const KTuple&)>;

/// x_i = T(z_{P(i)}) with T uniform full rank m x n and P uniform.
std::pair<XorInstance, XorObfuscation> obfuscate_xor(const XorInstance& z, unsigned m, SeededRng& rng);

/// Up to L rounds of obfuscate, call, lift K -> P(K), test on z. Round l uses
/// rng.child(l), so runs with matched seeds share their first rounds.
/// Default L = max(1, round(beta * 2^(n-m-2))).
ReductionReport xor_reduce(const XorInstance& z, unsigned m, const Oracle& oracle, const ReductionBudget& budget,
                           SeededRng& rng, const LiftFilter& accept = {});

/// Input list extended with uniform elements and shuffled: padded[i] is the
/// combined element perm(i); originals occupy combined positions [0, original).
struct Padding {
    Instance padded;
    Permutation perm;
    std::size_t original = 0;

    /// Tuple in input indices, or failure if it touches a padding element.
    OracleOutcome lift(const KTuple& t) const;
};

Padding make_padding(const Instance& z, std::size_t r_target, SeededRng& rng);

/// One oracle call on z padded to r_target elements.
ReductionReport pad_reduce(const Instance& z, std::size_t r_target, const Oracle& oracle, SeededRng& rng);
ReductionReport pad_reduce_xor(const XorInstance& z, std::size_t d, const Oracle& oracle, SeededRng& rng);
ReductionReport pad_reduce_sum(const Instance& z, std::size_t r_target, const Oracle& oracle, SeededRng& rng);

/// Oracle for r-element instances built from one for factor * r elements.
Oracle padded_oracle(Oracle inner, std::size_t factor);

/// Pads by d (default k) inside every oracle call, then runs xor_reduce.
ReductionReport xor_theorem_pipeline(const XorInstance& z, unsigned m, const Oracle& oracle,
                                     const ReductionBudget& budget, SeededRng& rng, std::size_t pad_factor = 0);

std::pair<MSumInstance, SumObfuscation> obfuscate_msum(const MSumInstance& z, std::uint64_t p, std::uint64_t q,
                                                       SeededRng& rng);

/// ceil(c * beta * q / (sqrt(k) * ln q)), at least 1.
std::uint64_t default_msum_iterations(double c, double beta, std::uint64_t q, std::size_t k);

/// Obfuscation loop from MSUM mod pq to an MSUM mod p oracle.
ReductionReport msum_reduce(const MSumInstance& z, std::uint64_t p, std::uint64_t q, const Oracle& oracle,
                            const ReductionBudget& budget, SeededRng& rng, double c = 0.25);

/// Prepared MSUM instance of the SUM to MSUM bridge.
struct SumToMSum {
    MSumInstance x;
    std::vector<std::size_t> origin;  // x index -> z index
    std::size_t r_prime = 0;
    std::size_t survivors = 0;  // r1
};

/// ceil(r * M / 4N).
std::size_t sum_to_msum_rprime(std::size_t r, std::uint64_t modulus, std::int64_t bound);

/// Range filter, reduction mod M and masking. Empty when r1 < r'.
std::optional<SumToMSum> prepare_sum_to_msum(const SumInstance& z, std::uint64_t modulus, SeededRng& rng);

/// Trace back and integer-sum test.
OracleOutcome finish_sum_to_msum(const SumInstance& z, const SumToMSum& prep, const KTuple& k_prime);

ReductionReport sum_to_msum(const SumInstance& z, std::uint64_t modulus, const Oracle& oracle, SeededRng& rng);

struct SumPipelineOptions {
    double c = 0.25;
    /// Outer padding of z before the bridge; 1 is a pure shuffle.
    std::size_t sparsify_factor = 1;
    /// Padding of the mod-p instances before the dense oracle.
    std::size_t inner_pad_factor = 1;
    /// Zero means at most budget.call_cap attempts (then the cap must be set).
    std::uint64_t max_attempts = 0;
};

/// Treats a dense SUM oracle as an MSUM mod p oracle on centered residues.
Oracle sum_as_msum_oracle(Oracle dense, std::size_t pad_factor);

/// Repeats attempts until success or the budget is spent. Each attempt samples
/// p in [M, 2M) and q in [N/2p, N/p), shuffles or pads z, applies the bridge
/// mod pq and solves the bridged instance with msum_reduce over the dense
/// oracle. When the q interval holds no prime the bridge works mod p directly.
ReductionReport sum_theorem_pipeline(const SumInstance& z, std::uint64_t M, const Oracle& dense,
                                     const ReductionBudget& budget, SeededRng& rng,
                                     const SumPipelineOptions& options = {});

/// Fraction of successful calls over `calls` fresh uniform instances of the given shape.
double pilot_beta(const Oracle& oracle, const Instance& shape, std::size_t calls, SeededRng& rng);

}  // namespace ksumforge
