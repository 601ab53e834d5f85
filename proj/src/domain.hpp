#pragma once

// Per-family value algebra shared by the solver implementations.

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "ksumforge/core.hpp"

namespace ksumforge::detail {

struct XorDomain {
    using Value = std::uint64_t;
    Value combine(Value a, Value b) const noexcept { return a ^ b; }
    /// The value that completes `partial` to a solution.
    Value need(Value partial) const noexcept { return partial; }
};

struct SumDomain {
    using Value = std::int64_t;
    Value combine(Value a, Value b) const noexcept { return a + b; }
    Value need(Value partial) const noexcept { return -partial; }
};

struct MSumDomain {
    using Value = std::uint64_t;
    std::uint64_t modulus;
    Value combine(Value a, Value b) const noexcept {
        const Value s = a + b;
        return s >= modulus ? s - modulus : s;
    }
    Value need(Value partial) const noexcept { return partial == 0 ? 0 : modulus - partial; }
};

/// Calls fn(domain, elements) with the domain matching the instance family.
template <class Fn>
decltype(auto) with_domain(const Instance& inst, Fn&& fn) {
    return std::visit(
        [&](const auto& in) -> decltype(auto) {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, XorInstance>)
                return fn(XorDomain{}, in.elements());
            else if constexpr (std::is_same_v<T, SumInstance>)
                return fn(SumDomain{}, in.elements());
            else
                return fn(MSumDomain{in.modulus()}, in.elements());
        },
        inst);
}

/// Visits every size-`k` subset of [0, n) in lexicographic order until fn returns true.
template <class Fn>
bool for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
    if (k > n) return false;
    std::vector<std::uint32_t> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = static_cast<std::uint32_t>(i);
    for (;;) {
        if (fn(std::span<const std::uint32_t>(c))) return true;
        std::size_t i = k;
        while (i > 0 && c[i - 1] == n - k + i - 1) --i;
        if (i == 0) return false;
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
}

/// Instance restricted to the given indices, in order.
Instance select_elements(const Instance& inst, std::span<const std::size_t> indices, std::size_t k);

/// Instance re-ordered so that element i is inst[perm(i)].
Instance permute_instance(const Instance& inst, const std::vector<std::size_t>& perm);

}  // namespace ksumforge::detail
