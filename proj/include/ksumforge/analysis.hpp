#pragma once

// Verification harness for the obfuscation bounds: correlated pair samplers,
// collision estimates against adversarial oracles, exact character-sum
// magnitudes at tiny parameters, and the quadruple counts.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ksumforge/core.hpp"
#include "ksumforge/stats.hpp"

namespace ksumforge {

struct PairSample {
    Instance x;
    Instance y;
    std::string sampler;
    std::string keys;
};

/// Two independent full-rank shrinkings F_2^(m+t) -> F_2^m of one uniform z.
PairSample sample_mrt(std::size_t k, unsigned m, std::size_t r, unsigned t, SeededRng& rng);

enum class PqrMode { kDefinition, kClaim };

/// Rounding residues v = w - q*round(w/q): [-q/2, q/2) as integers, which is
/// {(1-q)/2..(q-1)/2} for odd q.
std::int64_t sigma_min(std::uint64_t q) noexcept;
std::int64_t sigma_max(std::uint64_t q) noexcept;

/// (p,q,r)-arithmetic pair, from the definition or from the alternative
/// construction y_i = (gamma x_i + gamma' round(alpha v_i / q)) mod p.
PairSample sample_pqr(std::size_t k, std::uint64_t p, std::uint64_t q, std::size_t r, PqrMode mode, SeededRng& rng);

struct XorPairSpec {
    std::size_t k;
    unsigned m;
    std::size_t r;
    unsigned t;
};

struct ArithPairSpec {
    std::size_t k;
    std::uint64_t p;
    std::uint64_t q;
    std::size_t r;
    PqrMode mode = PqrMode::kDefinition;
};

using PairSpec = std::variant<XorPairSpec, ArithPairSpec>;

PairSample draw_pair(const PairSpec& spec, SeededRng& rng);

struct CollisionEstimate {
    PairSpec spec;
    std::uint64_t trials = 0;
    std::uint64_t collisions = 0;
    std::uint64_t x_successes = 0;
    std::uint64_t both_successes = 0;
    double estimate = 0;
    Interval ci;  // Wilson, 99%
    /// XOR: 2^(2-2t). Arithmetic: slack * (ln q / q^2 + p / (q C(r,k))).
    double paper_bound = 0;
    /// XOR: 2^(-2t) + 2^(m-t)/C(r,k) + 2^(-t+1-m). Arithmetic: the O() expression without slack.
    double theorem_bound = 0;
    double slack = 1;
};

/// Trial i draws a pair and two permutations from rng.child(i), runs the
/// oracle on both permuted instances, and counts equal un-permuted outputs.
CollisionEstimate estimate_collision(const Oracle& oracle, const PairSpec& spec, std::uint64_t trials,
                                     SeededRng& rng, unsigned threads = 1, double slack = 1);

/// Frequency vector S in Z_p^r.
struct Character {
    std::vector<std::uint64_t> S;
    std::uint64_t p;
};

struct MagnitudeResult {
    Character S;
    std::uint64_t q = 0;
    double value = 0;
    double imag = 0;
    std::string method;  // "exact-enumeration"
    std::uint64_t terms = 0;
};

inline constexpr std::uint64_t kMagnitudeBudget = 100'000'000;

/// Number of joint assignments (z, alpha1, alpha2, gamma1, gamma2): (pq)^r phi(pq)^2 (p-1)^2.
std::uint64_t magnitude_terms(std::uint64_t p, std::uint64_t q, std::size_t r);

/// E[chi_S(x) conj(chi_S(y))] summed term by term over every assignment.
MagnitudeResult magnitude_exact(const Character& S, std::uint64_t q, std::uint64_t budget = kMagnitudeBudget);

/// Pr[<T,x> = 0 and <T,y> = 0] by counting assignments, as a fraction.
struct Fraction {
    std::uint64_t num;
    std::uint64_t den;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
Fraction joint_zero_probability(const Character& T, std::uint64_t q, std::uint64_t budget = kMagnitudeBudget);

/// (p^2 Pr[<T,x> = <T,y> = 0] - 1) / (p-1)^2.
double magnitude_from_probability(const Character& T, std::uint64_t q, std::uint64_t budget = kMagnitudeBudget);

/// E[chi_S(x) conj(chi_S'(y))], factorized over z.
std::complex<double> magnitude_cross(const Character& S, const Character& S2, std::uint64_t q,
                                     std::uint64_t budget = kMagnitudeBudget);

/// Whether S2 = g * S for some unit g.
bool proportional(const Character& S, const Character& S2);

/// One nonzero vector per class {g S : g in Z_p^*}: first nonzero coordinate 1.
std::vector<Character> projective_representatives(std::uint64_t p, std::size_t r);

struct MagnitudeScan {
    std::uint64_t p = 0, q = 0;
    std::size_t r = 0;
    std::vector<MagnitudeResult> rows;
    double max_abs = 0;
    double max_scaled = 0;  // max |M| * pq
    double slack = 32;
    bool within() const { return max_scaled <= slack; }
};

MagnitudeScan magnitude_bound_scan(std::uint64_t p, std::uint64_t q, std::size_t r, double slack = 32,
                                   std::uint64_t budget = kMagnitudeBudget);

enum class QuadMode { kProduct, kSum };

/// Quadruples over {0..q-1}^4 with ab = cd (product) or ab + cd = N (sum). q <= 4096.
std::uint64_t count_quadruples(std::uint64_t q, QuadMode mode, std::uint64_t N = 0);

/// |{s in [sigma_min, sigma_max] : alpha s mod pq < q or > pq - q}|.
std::uint64_t z_alpha_size(std::uint64_t alpha, std::uint64_t p, std::uint64_t q);

struct AlignedStats {
    std::uint64_t p = 0, q = 0;
    std::uint64_t trials = 0;  // zero means every unit alpha was enumerated
    double mean = 0;
    double second_moment = 0;
    std::uint64_t max = 0;
    double mean_shape = 0;    // 1 + q/p
    double second_shape = 0;  // q^2 ln q / phi(pq)
};

/// Monte-Carlo over uniform units alpha mod pq; trials = 0 enumerates all of them.
AlignedStats aligned_sum_stats(std::uint64_t p, std::uint64_t q, std::uint64_t trials, SeededRng& rng);

}  // namespace ksumforge
