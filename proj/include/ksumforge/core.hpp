#pragma once

// Problem instances, solution tuples, validation, instance sampling and the
// oracle contract shared by solvers, reductions and the analysis harness.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ksumforge/rng.hpp"

namespace ksumforge {

/// Precondition or parameter-range violation.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A tuple that is not a well-formed solution candidate for an instance
/// (duplicate indices, wrong size, index out of range).
struct InvalidTuple : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A configured resource cap (enumeration count, table size) would be exceeded.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr unsigned kMaxWidth = 63;
inline constexpr std::size_t kMaxTupleSize = 63;

constexpr std::uint64_t width_mask(unsigned width) noexcept {
    return width >= 64 ? ~0ULL : ((1ULL << width) - 1);
}

/// An element of F_2^width packed into a word; bit j is coordinate j.
class BitVec {
public:
    BitVec(unsigned width, std::uint64_t bits);

    unsigned width() const noexcept { return width_; }
    std::uint64_t bits() const noexcept { return bits_; }

    friend BitVec operator^(const BitVec& a, const BitVec& b);
    friend bool operator==(const BitVec&, const BitVec&) = default;

private:
    unsigned width_;
    std::uint64_t bits_;
};

enum class Family { kXor, kSum, kMSum };

std::string to_string(Family f);

/// (k, 2^n, r)-XOR input: r vectors of width n.
class XorInstance {
public:
    XorInstance(std::size_t k, unsigned n, std::vector<std::uint64_t> elements);

    std::size_t k() const noexcept { return k_; }
    unsigned n() const noexcept { return n_; }
    std::size_t r() const noexcept { return elements_.size(); }
    std::span<const std::uint64_t> elements() const noexcept { return elements_; }
    BitVec element(std::size_t i) const { return BitVec(n_, elements_.at(i)); }

    friend bool operator==(const XorInstance&, const XorInstance&) = default;

private:
    std::size_t k_;
    unsigned n_;
    std::vector<std::uint64_t> elements_;
};

/// (k, N, r)-SUM input: r integers in [-N, N]. Requires k*N < 2^63 so every
/// k-subset sum is exact in a signed 64-bit word.
class SumInstance {
public:
    SumInstance(std::size_t k, std::int64_t bound, std::vector<std::int64_t> elements);

    std::size_t k() const noexcept { return k_; }
    std::int64_t bound() const noexcept { return bound_; }
    std::size_t r() const noexcept { return elements_.size(); }
    std::span<const std::int64_t> elements() const noexcept { return elements_; }

    friend bool operator==(const SumInstance&, const SumInstance&) = default;

private:
    std::size_t k_;
    std::int64_t bound_;
    std::vector<std::int64_t> elements_;
};

/// (k, L, r)-MSUM input: r residues in Z_L.
class MSumInstance {
public:
    MSumInstance(std::size_t k, std::uint64_t modulus, std::vector<std::uint64_t> elements);

    std::size_t k() const noexcept { return k_; }
    std::uint64_t modulus() const noexcept { return modulus_; }
    std::size_t r() const noexcept { return elements_.size(); }
    std::span<const std::uint64_t> elements() const noexcept { return elements_; }

    friend bool operator==(const MSumInstance&, const MSumInstance&) = default;

private:
    std::size_t k_;
    std::uint64_t modulus_;
    std::vector<std::uint64_t> elements_;
};

using Instance = std::variant<XorInstance, SumInstance, MSumInstance>;

Family family_of(const Instance& inst) noexcept;
std::size_t tuple_size(const Instance& inst) noexcept;
std::size_t list_size(const Instance& inst) noexcept;

/// Strictly increasing list of distinct indices; the canonical form of a
/// k-tuple regardless of the order an algorithm produced it in.
class KTuple {
public:
    KTuple() = default;

    /// Sorts; throws InvalidTuple on duplicates or an empty list.
    static KTuple from_indices(std::vector<std::size_t> indices);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t operator[](std::size_t i) const { return indices_[i]; }

    friend auto operator<=>(const KTuple&, const KTuple&) = default;

private:
    std::vector<std::size_t> indices_;
};

std::string to_string(const KTuple& t);

using OracleOutcome = std::optional<KTuple>;

struct OracleInfo {
    std::string name;
    Family family;
};

/// Opaque randomized procedure from an instance to a KTuple or failure.
/// Re-invocable; repeated calls may differ.
class Oracle {
public:
    using Fn = std::function<OracleOutcome(const Instance&, SeededRng&)>;

    Oracle(OracleInfo info, Fn fn) : info_(std::move(info)), fn_(std::move(fn)) {}

    OracleOutcome operator()(const Instance& inst, SeededRng& rng) const { return fn_(inst, rng); }
    const OracleInfo& info() const noexcept { return info_; }

private:
    OracleInfo info_;
    Fn fn_;
};

XorInstance gen_xor_instance(std::size_t k, unsigned n, std::size_t r, SeededRng& rng);
SumInstance gen_sum_instance(std::size_t k, std::int64_t bound, std::size_t r, SeededRng& rng);
MSumInstance gen_msum_instance(std::size_t k, std::uint64_t modulus, std::size_t r, SeededRng& rng);

/// True iff the tuple satisfies the instance's constraint. Throws InvalidTuple
/// when the tuple has the wrong size or an index outside [0, r).
bool validate(const Instance& inst, const KTuple& tuple);

/// Wraps an oracle so that any returned tuple failing validate, and any
/// InvalidTuple raised while producing one, becomes a failure.
Oracle checked_oracle(Oracle oracle);

/// An oracle that never finds anything. Handy as a test stub.
Oracle always_fail_oracle(Family family);

}  // namespace ksumforge
