#pragma once

// Concrete k-XOR / k-SUM / k-MSUM solvers. Each is usable directly (with a
// richer report) or through the Oracle contract via solver_oracle().

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ksumforge/core.hpp"

namespace ksumforge {

enum class Algorithm { kBruteForce, kSortAndMatch, kFilterDense3, kKTree, kExtendedKTree };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class JoinMethod { kSort, kHash };

/// kShuffleInput permutes the instance with the call's rng before solving,
/// which turns a deterministic solver into a randomized oracle.
enum class RandomnessPolicy { kDeterministic, kShuffleInput };

struct SolverLimits {
    std::uint64_t enumeration_cap = 100'000'000;  // C(r, k) for brute force
    std::uint64_t table_cap = 1ULL << 26;         // C(r, ceil(k/2)) for sort-and-match
    std::size_t list_cap = 1ULL << 24;            // k-tree intermediate list length
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::kKTree;
    /// Bits zeroed at each k-tree merge level, final merge last. Empty selects the default.
    std::vector<unsigned> level_bits;
    std::optional<std::int64_t> sum_threshold;
    std::optional<unsigned> xor_filter_bits;
    /// The 3-SUM/3-XOR filter keeps 2^slack times more survivors than the
    /// balanced threshold, lifting the expected solution count to Theta(1) with a usable constant.
    unsigned filter_slack_bits = 2;
    JoinMethod join = JoinMethod::kSort;
    RandomnessPolicy randomness = RandomnessPolicy::kDeterministic;
    /// Solve k-tree for non-power-of-two k by fixing the last k - k' elements.
    bool reduce_non_power_of_two = true;
    SolverLimits limits;
};

/// Saturates at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

/// Lexicographically smallest valid tuple, or failure. Deterministic.
/// Throws CapacityError if C(r, k) exceeds limits.enumeration_cap.
OracleOutcome brute_force(const Instance& inst, const SolverLimits& limits = {});

/// Meet in the middle: tabulates all ceil(k/2)-subsets by partial value, then
/// scans floor(k/2)-subsets in lexicographic order for an index-disjoint complement.
OracleOutcome sort_and_match(const Instance& inst, const SolverLimits& limits = {});

struct FilterReport {
    OracleOutcome outcome;
    std::size_t survivors = 0;
    std::int64_t threshold = 0;  // SUM / MSUM magnitude bound
    unsigned filter_bits = 0;    // XOR top bits required to be zero
};

std::int64_t default_sum_threshold(std::int64_t bound, std::size_t r, unsigned slack_bits);
unsigned default_xor_filter_bits(unsigned n, std::size_t r, unsigned slack_bits);

/// 3-SUM / 3-XOR in the dense regime: keep small elements, then sort_and_match.
FilterReport filter_dense3(const Instance& inst, const SolverConfig& cfg = {});

struct KTreeReport {
    OracleOutcome outcome;
    std::size_t lists = 0;         // k' (power of two actually merged)
    std::size_t sublist_size = 0;  // elements per input sublist
    std::vector<unsigned> schedule;
    /// list_sizes[level][list]; level 0 are the input sublists, the last
    /// level holds the number of final matches.
    std::vector<std::vector<std::size_t>> list_sizes;
    bool truncated = false;
};

/// Bit width used for MSUM level schedules: ceil(log2 L).
unsigned msum_width(std::uint64_t modulus) noexcept;

/// floor(L / 2^(zeroed_bits + 1)): half-width of the centered interval a
/// partial sum must fall in after zeroed_bits bits are cleared.
std::uint64_t msum_interval_bound(std::uint64_t modulus, unsigned zeroed_bits) noexcept;

/// Whether (u + v) mod L lies in the centered interval for zeroed_bits.
bool msum_pair_survives(std::uint64_t u, std::uint64_t v, std::uint64_t modulus, unsigned zeroed_bits) noexcept;

/// Wagner schedule for k' = 2^a lists: a - 1 levels of floor(w/(a+1)) bits,
/// final level takes the remainder.
std::vector<unsigned> ktree_schedule(unsigned width, std::size_t lists);

/// Minder-Sinclair style schedule for sublists smaller than 2^(w/(a+1)).
/// Falls back to ktree_schedule when the lists are dense enough.
/// Throws ParameterError when the sublists are below the solvable range.
std::vector<unsigned> extended_ktree_schedule(unsigned width, std::size_t lists, std::size_t sublist_size);

KTreeReport ktree(const Instance& inst, const SolverConfig& cfg = {});
KTreeReport extended_ktree(const Instance& inst, const SolverConfig& cfg = {});

/// Oracle running cfg.algorithm on instances of the given family.
Oracle solver_oracle(SolverConfig cfg, Family family);

/// brute_force as an oracle: deterministic and maximally correlated across
/// calls. The adversary the obfuscation is meant to defeat.
Oracle lexmin_oracle(Family family, SolverLimits limits = {});

}  // namespace ksumforge
