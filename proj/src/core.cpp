#include "ksumforge/core.hpp"

#include <algorithm>
#include <sstream>

namespace ksumforge {

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform_below: bound must be positive");
    // Lemire, "Fast random integer generation in an interval" (2019).
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(engine_()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ParameterError("uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~0ULL) return static_cast<std::int64_t>(engine_());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + uniform_below(span + 1));
}

std::uint64_t SeededRng::bits(unsigned width) {
    if (width > 64) throw ParameterError("bits: width exceeds 64");
    return engine_() & width_mask(width);
}

BitVec::BitVec(unsigned width, std::uint64_t bits) : width_(width), bits_(bits) {
    if (width < 1 || width > kMaxWidth) throw ParameterError("BitVec: width must be in [1, 63]");
    if (bits > width_mask(width)) throw ParameterError("BitVec: bits exceed width");
}

BitVec operator^(const BitVec& a, const BitVec& b) {
    if (a.width_ != b.width_) throw ParameterError("BitVec xor: width mismatch");
    return BitVec(a.width_, a.bits_ ^ b.bits_);
}

std::string to_string(Family f) {
    switch (f) {
        case Family::kXor: return "kxor";
        case Family::kSum: return "ksum";
        case Family::kMSum: return "kmsum";
    }
    return "?";
}

namespace {

void check_tuple_size(std::size_t k, std::size_t r) {
    if (k < 2 || k > kMaxTupleSize) throw ParameterError("k must be in [2, 63]");
    if (r < k) throw ParameterError("instance requires r >= k");
}

}  // namespace

XorInstance::XorInstance(std::size_t k, unsigned n, std::vector<std::uint64_t> elements)
    : k_(k), n_(n), elements_(std::move(elements)) {
    check_tuple_size(k_, elements_.size());
    if (n_ < 1 || n_ > kMaxWidth) throw ParameterError("XOR width n must be in [1, 63]");
    const std::uint64_t mask = width_mask(n_);
    for (auto e : elements_)
        if (e > mask) throw ParameterError("XOR element exceeds width");
}

SumInstance::SumInstance(std::size_t k, std::int64_t bound, std::vector<std::int64_t> elements)
    : k_(k), bound_(bound), elements_(std::move(elements)) {
    check_tuple_size(k_, elements_.size());
    if (bound_ < 1 || bound_ >= (std::int64_t{1} << 62)) throw ParameterError("SUM bound N must be in [1, 2^62)");
    if (static_cast<unsigned __int128>(k_) * static_cast<unsigned __int128>(bound_) >=
        (static_cast<unsigned __int128>(1) << 63))
        throw ParameterError("SUM requires k*N < 2^63");
    for (auto e : elements_)
        if (e < -bound_ || e > bound_) throw ParameterError("SUM element outside [-N, N]");
}

MSumInstance::MSumInstance(std::size_t k, std::uint64_t modulus, std::vector<std::uint64_t> elements)
    : k_(k), modulus_(modulus), elements_(std::move(elements)) {
    check_tuple_size(k_, elements_.size());
    if (modulus_ < 1 || modulus_ >= (1ULL << 63)) throw ParameterError("MSUM modulus must be in [1, 2^63)");
    for (auto e : elements_)
        if (e >= modulus_) throw ParameterError("MSUM element not reduced modulo L");
}

Family family_of(const Instance& inst) noexcept {
    return static_cast<Family>(inst.index());
}

std::size_t tuple_size(const Instance& inst) noexcept {
    return std::visit([](const auto& i) { return i.k(); }, inst);
}

std::size_t list_size(const Instance& inst) noexcept {
    return std::visit([](const auto& i) { return i.r(); }, inst);
}

KTuple KTuple::from_indices(std::vector<std::size_t> indices) {
    if (indices.empty()) throw InvalidTuple("empty tuple");
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw InvalidTuple("tuple has duplicate indices");
    KTuple t;
    t.indices_ = std::move(indices);
    return t;
}

std::string to_string(const KTuple& t) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
    os << ')';
    return os.str();
}

XorInstance gen_xor_instance(std::size_t k, unsigned n, std::size_t r, SeededRng& rng) {
    check_tuple_size(k, r);
    if (n < 1 || n > kMaxWidth) throw ParameterError("XOR width n must be in [1, 63]");
    std::vector<std::uint64_t> e(r);
    for (auto& v : e) v = rng.bits(n);
    return XorInstance(k, n, std::move(e));
}

SumInstance gen_sum_instance(std::size_t k, std::int64_t bound, std::size_t r, SeededRng& rng) {
    check_tuple_size(k, r);
    if (bound < 1 || bound >= (std::int64_t{1} << 62)) throw ParameterError("SUM bound N must be in [1, 2^62)");
    std::vector<std::int64_t> e(r);
    for (auto& v : e) v = rng.uniform_int(-bound, bound);
    return SumInstance(k, bound, std::move(e));
}

MSumInstance gen_msum_instance(std::size_t k, std::uint64_t modulus, std::size_t r, SeededRng& rng) {
    check_tuple_size(k, r);
    if (modulus < 1 || modulus >= (1ULL << 63)) throw ParameterError("MSUM modulus must be in [1, 2^63)");
    std::vector<std::uint64_t> e(r);
    for (auto& v : e) v = rng.uniform_below(modulus);
    return MSumInstance(k, modulus, std::move(e));
}

bool validate(const Instance& inst, const KTuple& tuple) {
    const std::size_t r = list_size(inst);
    if (tuple.size() != tuple_size(inst)) throw InvalidTuple("tuple size differs from k");
    for (auto i : tuple.indices())
        if (i >= r) throw InvalidTuple("tuple index out of range");
    return std::visit(
        [&](const auto& in) -> bool {
            using T = std::decay_t<decltype(in)>;
            const auto e = in.elements();
            if constexpr (std::is_same_v<T, XorInstance>) {
                std::uint64_t acc = 0;
                for (auto i : tuple.indices()) acc ^= e[i];
                return acc == 0;
            } else if constexpr (std::is_same_v<T, SumInstance>) {
                std::int64_t acc = 0;
                for (auto i : tuple.indices()) acc += e[i];
                return acc == 0;
            } else {
                std::uint64_t acc = 0;
                const std::uint64_t L = in.modulus();
                for (auto i : tuple.indices()) {
                    acc += e[i];
                    if (acc >= L) acc -= L;
                }
                return acc == 0;
            }
        },
        inst);
}

Oracle checked_oracle(Oracle oracle) {
    OracleInfo info = oracle.info();
    return Oracle(std::move(info), [inner = std::move(oracle)](const Instance& inst, SeededRng& rng) -> OracleOutcome {
        try {
            OracleOutcome out = inner(inst, rng);
            if (out && !validate(inst, *out)) return std::nullopt;
            return out;
        } catch (const InvalidTuple&) {
            return std::nullopt;
        }
    });
}

Oracle always_fail_oracle(Family family) {
    return Oracle({"always-fail", family}, [](const Instance&, SeededRng&) -> OracleOutcome { return std::nullopt; });
}

}  // namespace ksumforge
