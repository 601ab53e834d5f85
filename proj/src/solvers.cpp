#include "ksumforge/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "domain.hpp"
#include "ksumforge/algebra.hpp"

namespace ksumforge {

namespace detail {

Instance select_elements(const Instance& inst, std::span<const std::size_t> indices, std::size_t k) {
    return std::visit(
        [&](const auto& in) -> Instance {
            using T = std::decay_t<decltype(in)>;
            const auto e = in.elements();
            std::vector<typename decltype(e)::value_type> out;
            out.reserve(indices.size());
            for (auto i : indices) out.push_back(e[i]);
            if constexpr (std::is_same_v<T, XorInstance>)
                return XorInstance(k, in.n(), std::move(out));
            else if constexpr (std::is_same_v<T, SumInstance>)
                return SumInstance(k, in.bound(), std::move(out));
            else
                return MSumInstance(k, in.modulus(), std::move(out));
        },
        inst);
}

Instance permute_instance(const Instance& inst, const std::vector<std::size_t>& perm) {
    return select_elements(inst, perm, tuple_size(inst));
}

}  // namespace detail

using detail::for_each_combination;
using detail::with_domain;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kBruteForce: return "brute-force";
        case Algorithm::kSortAndMatch: return "sort-and-match";
        case Algorithm::kFilterDense3: return "filter-dense3";
        case Algorithm::kKTree: return "ktree";
        case Algorithm::kExtendedKTree: return "extended-ktree";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    for (auto a : {Algorithm::kBruteForce, Algorithm::kSortAndMatch, Algorithm::kFilterDense3, Algorithm::kKTree,
                   Algorithm::kExtendedKTree})
        if (name == to_string(a)) return a;
    if (name == "lexmin" || name == "brute") return Algorithm::kBruteForce;
    throw ParameterError("unknown algorithm: " + std::string(name));
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > ~0ULL) return ~0ULL;
    }
    return static_cast<std::uint64_t>(acc);
}

namespace {

template <class D>
OracleOutcome brute_force_impl(const D& dom, std::span<const typename D::Value> e, std::size_t k) {
    using V = typename D::Value;
    const std::size_t r = e.size();
    std::unordered_map<V, std::vector<std::uint32_t>> positions;
    for (std::size_t i = 0; i < r; ++i) positions[e[i]].push_back(static_cast<std::uint32_t>(i));

    // Depth-first over the first k-1 indices in lexicographic order; the last
    // index is the smallest position after the prefix holding the needed value.
    std::vector<std::size_t> idx(k);
    auto search = [&](auto&& self, std::size_t depth, std::size_t start, V acc) -> bool {
        if (depth == k - 1) {
            const auto it = positions.find(dom.need(acc));
            if (it == positions.end()) return false;
            const auto p = std::upper_bound(it->second.begin(), it->second.end(), idx[k - 2]);
            if (p == it->second.end()) return false;
            idx[k - 1] = *p;
            return true;
        }
        for (std::size_t i = start; i + (k - depth) <= r; ++i) {
            idx[depth] = i;
            if (self(self, depth + 1, i + 1, depth == 0 ? e[i] : dom.combine(acc, e[i]))) return true;
        }
        return false;
    };
    if (!search(search, 0, 0, V{})) return std::nullopt;
    return KTuple::from_indices(idx);
}

template <class D>
OracleOutcome sort_and_match_impl(const D& dom, std::span<const typename D::Value> e, std::size_t k,
                                  const SolverLimits& limits) {
    using V = typename D::Value;
    const std::size_t r = e.size();
    const std::size_t half = (k + 1) / 2;
    const std::size_t rest = k / 2;
    const std::uint64_t entries = binomial(r, half);
    if (entries > limits.table_cap) throw CapacityError("sort_and_match: half-subset table exceeds cap");

    std::vector<V> keys;
    std::vector<std::uint32_t> members;
    keys.reserve(entries);
    members.reserve(entries * half);
    for_each_combination(r, half, [&](std::span<const std::uint32_t> c) {
        V acc = e[c[0]];
        for (std::size_t j = 1; j < c.size(); ++j) acc = dom.combine(acc, e[c[j]]);
        keys.push_back(acc);
        members.insert(members.end(), c.begin(), c.end());
        return false;
    });

    std::vector<std::uint32_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    std::vector<V> sorted_keys(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_keys[i] = keys[order[i]];

    std::vector<std::size_t> found;
    for_each_combination(r, rest, [&](std::span<const std::uint32_t> c) {
        V acc = e[c[0]];
        for (std::size_t j = 1; j < c.size(); ++j) acc = dom.combine(acc, e[c[j]]);
        const V target = dom.need(acc);
        auto [lo, hi] = std::equal_range(sorted_keys.begin(), sorted_keys.end(), target);
        for (auto it = lo; it != hi; ++it) {
            const std::uint32_t* m = &members[static_cast<std::size_t>(order[it - sorted_keys.begin()]) * half];
            bool disjoint = true;
            for (std::size_t a = 0; a < half && disjoint; ++a)
                for (auto b : c)
                    if (m[a] == b) {
                        disjoint = false;
                        break;
                    }
            if (!disjoint) continue;
            found.assign(c.begin(), c.end());
            found.insert(found.end(), m, m + half);
            return true;
        }
        return false;
    });
    if (found.empty()) return std::nullopt;
    return KTuple::from_indices(std::move(found));
}

}  // namespace

OracleOutcome brute_force(const Instance& inst, const SolverLimits& limits) {
    const std::size_t k = tuple_size(inst);
    if (binomial(list_size(inst), k) > limits.enumeration_cap)
        throw CapacityError("brute_force: C(r, k) exceeds the enumeration cap");
    return with_domain(inst, [&](const auto& dom, auto e) { return brute_force_impl(dom, e, k); });
}

OracleOutcome sort_and_match(const Instance& inst, const SolverLimits& limits) {
    const std::size_t k = tuple_size(inst);
    return with_domain(inst, [&](const auto& dom, auto e) { return sort_and_match_impl(dom, e, k, limits); });
}

std::int64_t default_sum_threshold(std::int64_t bound, std::size_t r, unsigned slack_bits) {
    // Balances survivors s ~ r*theta/N against solutions s^3/theta.
    const double base = std::pow(static_cast<double>(bound) / static_cast<double>(r), 1.5);
    const double theta = std::ceil(std::ldexp(base, static_cast<int>(slack_bits)));
    if (!(theta < static_cast<double>(bound))) return bound;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(theta));
}

unsigned default_xor_filter_bits(unsigned n, std::size_t r, unsigned slack_bits) {
    const double s = std::ceil((3.0 * std::log2(static_cast<double>(r)) - n) / 2.0) - slack_bits;
    if (s <= 0) return 0;
    return std::min(n, static_cast<unsigned>(s));
}

FilterReport filter_dense3(const Instance& inst, const SolverConfig& cfg) {
    if (tuple_size(inst) != 3) throw ParameterError("filter_dense3: requires k = 3");
    const std::size_t r = list_size(inst);
    const double cube = std::pow(static_cast<double>(r), 3.0);
    FilterReport rep;
    std::vector<std::size_t> keep;
    std::visit(
        [&](const auto& in) {
            using T = std::decay_t<decltype(in)>;
            const auto e = in.elements();
            if constexpr (std::is_same_v<T, XorInstance>) {
                if (cube < std::ldexp(1.0, static_cast<int>(in.n())))
                    throw ParameterError("filter_dense3: instance is not in the dense regime r^3 >= 2^n");
                rep.filter_bits = cfg.xor_filter_bits.value_or(default_xor_filter_bits(in.n(), r, cfg.filter_slack_bits));
                if (rep.filter_bits > in.n()) throw ParameterError("filter_dense3: filter bits exceed width");
                const unsigned shift = in.n() - rep.filter_bits;
                for (std::size_t i = 0; i < r; ++i)
                    if (rep.filter_bits == 0 || (e[i] >> shift) == 0) keep.push_back(i);
            } else {
                std::int64_t bound = 0;
                if constexpr (std::is_same_v<T, SumInstance>)
                    bound = in.bound();
                else
                    bound = static_cast<std::int64_t>(in.modulus() / 2);
                if (cube < 2.0 * static_cast<double>(bound) + 1.0)
                    throw ParameterError("filter_dense3: instance is not in the dense regime r^3 >= domain size");
                rep.threshold = cfg.sum_threshold.value_or(default_sum_threshold(std::max<std::int64_t>(bound, 1), r, cfg.filter_slack_bits));
                if (rep.threshold < 0) throw ParameterError("filter_dense3: negative threshold");
                for (std::size_t i = 0; i < r; ++i) {
                    std::int64_t v = 0;
                    if constexpr (std::is_same_v<T, SumInstance>)
                        v = e[i];
                    else
                        v = centered(e[i], in.modulus());
                    if (v >= -rep.threshold && v <= rep.threshold) keep.push_back(i);
                }
            }
        },
        inst);
    rep.survivors = keep.size();
    if (keep.size() < 3) return rep;
    const Instance sub = detail::select_elements(inst, keep, 3);
    if (auto t = sort_and_match(sub, cfg.limits)) {
        std::vector<std::size_t> idx;
        for (auto i : t->indices()) idx.push_back(keep[i]);
        rep.outcome = KTuple::from_indices(std::move(idx));
    }
    return rep;
}

namespace {

OracleOutcome run_algorithm(const SolverConfig& cfg, const Instance& inst) {
    switch (cfg.algorithm) {
        case Algorithm::kBruteForce: return brute_force(inst, cfg.limits);
        case Algorithm::kSortAndMatch: return sort_and_match(inst, cfg.limits);
        case Algorithm::kFilterDense3: return filter_dense3(inst, cfg).outcome;
        case Algorithm::kKTree: return ktree(inst, cfg).outcome;
        case Algorithm::kExtendedKTree: return extended_ktree(inst, cfg).outcome;
    }
    return std::nullopt;
}

}  // namespace

Oracle solver_oracle(SolverConfig cfg, Family family) {
    std::string name = to_string(cfg.algorithm);
    return Oracle({std::move(name), family}, [cfg = std::move(cfg), family](const Instance& inst, SeededRng& rng) -> OracleOutcome {
        if (family_of(inst) != family) throw ParameterError("solver oracle: instance family mismatch");
        if (cfg.randomness == RandomnessPolicy::kDeterministic) return run_algorithm(cfg, inst);
        const Permutation perm = sample_permutation(list_size(inst), rng);
        const Instance shuffled = detail::permute_instance(inst, perm.image());
        auto out = run_algorithm(cfg, shuffled);
        if (!out) return out;
        std::vector<std::size_t> idx;
        for (auto i : out->indices()) idx.push_back(perm(i));
        return KTuple::from_indices(std::move(idx));
    });
}

Oracle lexmin_oracle(Family family, SolverLimits limits) {
    return Oracle({"lexmin", family}, [family, limits](const Instance& inst, SeededRng&) -> OracleOutcome {
        if (family_of(inst) != family) throw ParameterError("lexmin oracle: instance family mismatch");
        return brute_force(inst, limits);
    });
}

}  // namespace ksumforge
