#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "domain.hpp"
#include "ksumforge/algebra.hpp"
#include "ksumforge/solvers.hpp"

namespace ksumforge {

unsigned msum_width(std::uint64_t modulus) noexcept {
    return modulus <= 1 ? 0u : static_cast<unsigned>(std::bit_width(modulus - 1));
}

std::uint64_t msum_interval_bound(std::uint64_t modulus, unsigned zeroed_bits) noexcept {
    if (zeroed_bits >= 63) return 0;
    return modulus >> (zeroed_bits + 1);
}

bool msum_pair_survives(std::uint64_t u, std::uint64_t v, std::uint64_t modulus, unsigned zeroed_bits) noexcept {
    const std::uint64_t b = msum_interval_bound(modulus, zeroed_bits);
    if (2 * b + 1 >= modulus) return true;
    const std::int64_t s = centered(detail::MSumDomain{modulus}.combine(u, v), modulus);
    return s >= -static_cast<std::int64_t>(b) && s <= static_cast<std::int64_t>(b);
}

namespace {

unsigned levels_for(std::size_t lists) {
    if (lists < 2 || !std::has_single_bit(lists)) throw ParameterError("k-tree: list count must be a power of two >= 2");
    return static_cast<unsigned>(std::countr_zero(lists));
}

}  // namespace

std::vector<unsigned> ktree_schedule(unsigned width, std::size_t lists) {
    const unsigned a = levels_for(lists);
    const unsigned per = width / (a + 1);
    std::vector<unsigned> s(a - 1, per);
    s.push_back(width - (a - 1) * per);
    return s;
}

std::vector<unsigned> extended_ktree_schedule(unsigned width, std::size_t lists, std::size_t sublist_size) {
    const unsigned a = levels_for(lists);
    if (a == 1) return {width};
    const double lam = std::log2(static_cast<double>(std::max<std::size_t>(sublist_size, 1)));
    const double excess = 2.0 * a * lam - width;
    if (excess < -1e-9) throw ParameterError("extended k-tree: sublists below the solvable range 2^(w/2a)");
    const unsigned plain = width / (a + 1);
    const auto b1 = static_cast<unsigned>(std::ceil(excess / (a - 1) - 1e-9));
    if (b1 >= plain) return ktree_schedule(width, lists);
    // Middle levels hold the list length at 2^(2*lam - b1).
    const auto mid = static_cast<unsigned>(std::max(0.0, std::round(2.0 * lam) - b1));
    std::vector<unsigned> s{b1};
    unsigned used = b1;
    for (unsigned l = 1; l + 1 < a; ++l) {
        const unsigned b = std::min(mid, width - used);
        s.push_back(b);
        used += b;
    }
    s.push_back(width - used);
    return s;
}

namespace {

struct Node {
    std::uint64_t value;
    std::uint32_t left;
    std::uint32_t right;
};

using List = std::vector<Node>;

void sort_by_value(List& list, unsigned shift) {
    std::stable_sort(list.begin(), list.end(),
                     [shift](const Node& x, const Node& y) { return (x.value >> shift) < (y.value >> shift); });
}

// Emits surviving pairs (i, j) of positions into a and b, in scan order,
// until emit returns false. May reorder a and b.
template <class Emit>
void join_xor(List& a, List& b, unsigned width, unsigned zeroed, JoinMethod method, Emit&& emit) {
    const unsigned shift = width - zeroed;
    auto key = [shift](std::uint64_t v) { return shift >= 64 ? 0 : v >> shift; };
    if (method == JoinMethod::kHash) {
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> table;
        for (std::uint32_t j = 0; j < b.size(); ++j) table[key(b[j].value)].push_back(j);
        for (std::uint32_t i = 0; i < a.size(); ++i) {
            const auto it = table.find(key(a[i].value));
            if (it == table.end()) continue;
            for (auto j : it->second)
                if (!emit(i, j)) return;
        }
        return;
    }
    if (shift < 64) {
        sort_by_value(a, shift);
        sort_by_value(b, shift);
    }
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const auto ka = key(a[i].value), kb = key(b[j].value);
        if (ka < kb) {
            ++i;
        } else if (kb < ka) {
            ++j;
        } else {
            std::size_t ie = i, je = j;
            while (ie < a.size() && key(a[ie].value) == ka) ++ie;
            while (je < b.size() && key(b[je].value) == ka) ++je;
            for (auto x = i; x < ie; ++x)
                for (auto y = j; y < je; ++y)
                    if (!emit(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y))) return;
            i = ie;
            j = je;
        }
    }
}

template <class Emit>
void join_msum(List& a, List& b, std::uint64_t modulus, unsigned zeroed, Emit&& emit) {
    const std::uint64_t half = msum_interval_bound(modulus, zeroed);
    sort_by_value(a, 0);
    sort_by_value(b, 0);
    if (2 * half + 1 >= modulus) {
        for (std::uint32_t i = 0; i < a.size(); ++i)
            for (std::uint32_t j = 0; j < b.size(); ++j)
                if (!emit(i, j)) return;
        return;
    }
    auto lower = [&](std::uint64_t v) {
        return static_cast<std::uint32_t>(
            std::lower_bound(b.begin(), b.end(), v, [](const Node& n, std::uint64_t x) { return n.value < x; }) - b.begin());
    };
    auto upper = [&](std::uint64_t v) {
        return static_cast<std::uint32_t>(
            std::upper_bound(b.begin(), b.end(), v, [](std::uint64_t x, const Node& n) { return x < n.value; }) - b.begin());
    };
    for (std::uint32_t i = 0; i < a.size(); ++i) {
        // Partners v with (u + v) mod L in [-half, half]: a circular window
        // of 2*half + 1 residues starting at (-u - half) mod L.
        const std::uint64_t u = a[i].value;
        const std::uint64_t start = reduce_signed(-static_cast<std::int64_t>(u) - static_cast<std::int64_t>(half), modulus);
        const std::uint64_t end = start + 2 * half;
        std::uint32_t ranges[2][2];
        int count = 0;
        if (end < modulus) {
            ranges[count][0] = lower(start);
            ranges[count++][1] = upper(end);
        } else {
            ranges[count][0] = 0;
            ranges[count++][1] = upper(end - modulus);
            ranges[count][0] = lower(start);
            ranges[count++][1] = static_cast<std::uint32_t>(b.size());
        }
        for (int c = 0; c < count; ++c)
            for (auto j = ranges[c][0]; j < ranges[c][1]; ++j)
                if (!emit(i, j)) return;
    }
}

struct TreeInput {
    unsigned width = 0;
    std::uint64_t modulus = 0;  // zero for XOR
    std::vector<List> lists;
    std::vector<std::size_t> fixed;  // indices fixed by the non-power-of-two reduction
};

TreeInput prepare(const Instance& inst, const SolverConfig& cfg) {
    TreeInput in;
    const std::size_t k = tuple_size(inst);
    const std::size_t r = list_size(inst);
    const std::size_t kp = std::bit_floor(k);
    if (kp != k && !cfg.reduce_non_power_of_two) throw ParameterError("k-tree: k must be a power of two");

    std::vector<std::uint64_t> values;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SumInstance>) {
                throw ParameterError("k-tree: supports XOR and MSUM instances only");
            } else {
                values.assign(x.elements().begin(), x.elements().end());
                if constexpr (std::is_same_v<T, XorInstance>)
                    in.width = x.n();
                else {
                    in.modulus = x.modulus();
                    in.width = msum_width(x.modulus());
                }
            }
        },
        inst);

    const std::size_t usable = r - (k - kp);
    std::uint64_t offset = 0;
    for (std::size_t i = usable; i < r; ++i) {
        in.fixed.push_back(i);
        offset = in.modulus ? detail::MSumDomain{in.modulus}.combine(offset, values[i]) : offset ^ values[i];
    }
    const std::size_t sub = usable / kp;
    in.lists.resize(kp);
    for (std::size_t j = 0; j < kp; ++j) {
        in.lists[j].reserve(sub);
        for (std::size_t i = j * sub; i < (j + 1) * sub; ++i) {
            std::uint64_t v = values[i];
            if (j == 0) v = in.modulus ? detail::MSumDomain{in.modulus}.combine(v, offset) : v ^ offset;
            in.lists[j].push_back({v, static_cast<std::uint32_t>(i), 0});
        }
    }
    return in;
}

KTreeReport run_tree(const Instance& inst, const SolverConfig& cfg, bool extended) {
    TreeInput in = prepare(inst, cfg);
    KTreeReport rep;
    rep.lists = in.lists.size();
    rep.sublist_size = in.lists.front().size();
    const unsigned a = levels_for(rep.lists);

    if (!cfg.level_bits.empty()) {
        rep.schedule = cfg.level_bits;
        if (rep.schedule.size() != a) throw ParameterError("k-tree: schedule length must equal log2(k')");
        if (std::accumulate(rep.schedule.begin(), rep.schedule.end(), 0u) != in.width)
            throw ParameterError("k-tree: schedule must sum to the instance width");
    } else {
        rep.schedule = extended ? extended_ktree_schedule(in.width, rep.lists, rep.sublist_size)
                                : ktree_schedule(in.width, rep.lists);
    }

    std::vector<std::vector<List>> levels;
    levels.push_back(std::move(in.lists));
    rep.list_sizes.emplace_back();
    for (const auto& l : levels[0]) rep.list_sizes[0].push_back(l.size());
    if (rep.sublist_size == 0) return rep;

    const JoinMethod join = in.modulus ? JoinMethod::kSort : cfg.join;
    auto run_join = [&](List& x, List& y, unsigned zeroed, auto&& emit) {
        if (in.modulus)
            join_msum(x, y, in.modulus, zeroed, emit);
        else
            join_xor(x, y, in.width, zeroed, join, emit);
    };
    auto combine = [&](std::uint64_t u, std::uint64_t v) {
        return in.modulus ? detail::MSumDomain{in.modulus}.combine(u, v) : u ^ v;
    };

    unsigned zeroed = 0;
    for (unsigned level = 0; level + 1 < a; ++level) {
        zeroed += rep.schedule[level];
        auto& children = levels.back();
        std::vector<List> parents(children.size() / 2);
        for (std::size_t p = 0; p < parents.size(); ++p) {
            List& x = children[2 * p];
            List& y = children[2 * p + 1];
            List& out = parents[p];
            run_join(x, y, zeroed, [&](std::uint32_t i, std::uint32_t j) {
                if (out.size() >= cfg.limits.list_cap) {
                    rep.truncated = true;
                    return false;
                }
                out.push_back({combine(x[i].value, y[j].value), i, j});
                return true;
            });
        }
        levels.push_back(std::move(parents));
        rep.list_sizes.emplace_back();
        bool empty = false;
        for (const auto& l : levels.back()) {
            rep.list_sizes.back().push_back(l.size());
            empty = empty || l.empty();
        }
        if (empty) return rep;
    }

    zeroed += rep.schedule.back();
    auto& top = levels.back();
    std::size_t matches = 0;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> first;
    run_join(top[0], top[1], zeroed, [&](std::uint32_t i, std::uint32_t j) {
        if (!first) first.emplace(i, j);
        ++matches;
        return true;
    });
    rep.list_sizes.push_back({matches});
    if (!first) return rep;

    std::vector<std::size_t> indices = in.fixed;
    auto trace = [&](auto&& self, std::size_t level, std::size_t list, std::uint32_t pos) -> void {
        const Node& n = levels[level][list][pos];
        if (level == 0) {
            indices.push_back(n.left);
            return;
        }
        self(self, level - 1, 2 * list, n.left);
        self(self, level - 1, 2 * list + 1, n.right);
    };
    const std::size_t top_level = levels.size() - 1;
    trace(trace, top_level, 0, first->first);
    trace(trace, top_level, 1, first->second);
    rep.outcome = KTuple::from_indices(std::move(indices));
    return rep;
}

}  // namespace

KTreeReport ktree(const Instance& inst, const SolverConfig& cfg) { return run_tree(inst, cfg, false); }

KTreeReport extended_ktree(const Instance& inst, const SolverConfig& cfg) { return run_tree(inst, cfg, true); }

}  // namespace ksumforge
