#include "ksumforge/reductions.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "domain.hpp"

namespace ksumforge {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool out_of_time(const ReductionBudget& b, Clock::time_point start) {
    return b.wall_ms_cap > 0 && elapsed_ms(start) >= b.wall_ms_cap;
}

std::uint64_t remaining_calls(const ReductionBudget& b, std::uint64_t used) {
    if (b.call_cap == 0) return ~0ULL;
    return used >= b.call_cap ? 0 : b.call_cap - used;
}

void require_family(const Oracle& oracle, Family f, const char* who) {
    if (oracle.info().family != f)
        throw ParameterError(std::string(who) + ": oracle declared for " + to_string(oracle.info().family) +
                             ", needs " + to_string(f));
}

Instance fresh_like(const Instance& shape, SeededRng& rng) {
    return std::visit(
        [&](const auto& s) -> Instance {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, XorInstance>)
                return gen_xor_instance(s.k(), s.n(), s.r(), rng);
            else if constexpr (std::is_same_v<T, SumInstance>)
                return gen_sum_instance(s.k(), s.bound(), s.r(), rng);
            else
                return gen_msum_instance(s.k(), s.modulus(), s.r(), rng);
        },
        shape);
}

}  // namespace

void ReductionReport::absorb(const ReductionReport& inner) {
    calls += inner.calls;
    successes += inner.successes;
    candidates += inner.candidates;
    lifted += inner.lifted;
    pilot_calls += inner.pilot_calls;
}

double pilot_beta(const Oracle& oracle, const Instance& shape, std::size_t calls, SeededRng& rng) {
    if (calls == 0) return 0;
    const Oracle checked = checked_oracle(oracle);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < calls; ++i) {
        SeededRng sub = rng.child(i);
        const Instance inst = fresh_like(shape, sub);
        if (checked(inst, sub)) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(calls);
}

std::pair<XorInstance, XorObfuscation> obfuscate_xor(const XorInstance& z, unsigned m, SeededRng& rng) {
    if (m < 1 || m > z.n()) throw ParameterError("obfuscate_xor: need 1 <= m <= n");
    F2Matrix t = sample_full_rank(m, z.n(), rng);
    Permutation perm = sample_permutation(z.r(), rng);
    std::vector<std::uint64_t> x(z.r());
    for (std::size_t i = 0; i < z.r(); ++i) x[i] = t.apply(z.elements()[perm(i)]);
    return {XorInstance(z.k(), m, std::move(x)), XorObfuscation{std::move(t), std::move(perm)}};
}

ReductionReport xor_reduce(const XorInstance& z, unsigned m, const Oracle& oracle, const ReductionBudget& budget,
                           SeededRng& rng, const LiftFilter& accept) {
    require_family(oracle, Family::kXor, "xor_reduce");
    if (m < 1 || m > z.n()) throw ParameterError("xor_reduce: need 1 <= m <= n");
    const auto start = Clock::now();
    ReductionReport rep;

    std::uint64_t iterations = budget.iterations;
    if (iterations == 0) {
        double beta = 0;
        if (budget.beta_hint) {
            beta = *budget.beta_hint;
        } else {
            SeededRng pilot = rng.child(~0ULL);
            beta = pilot_beta(oracle, XorInstance(z.k(), m, std::vector<std::uint64_t>(z.r(), 0)), 32, pilot);
            rep.pilot_calls = 32;
        }
        iterations = std::max<std::uint64_t>(1, std::llround(beta * std::ldexp(1.0, static_cast<int>(z.n() - m) - 2)));
    }

    const Oracle checked = checked_oracle(oracle);
    for (std::uint64_t l = 0; l < iterations; ++l) {
        if (remaining_calls(budget, rep.calls) == 0 || out_of_time(budget, start)) break;
        SeededRng it = rng.child(l);
        auto [x, obf] = obfuscate_xor(z, m, it);
        ++rep.calls;
        const OracleOutcome k = checked(Instance(x), it);
        if (!k) continue;
        ++rep.successes;
        std::vector<std::size_t> lifted;
        std::uint64_t acc = 0;
        for (auto i : k->indices()) {
            lifted.push_back(obf.P(i));
            acc ^= z.elements()[obf.P(i)];
        }
        if (obf.T.apply(acc) != 0) throw std::logic_error("xor_reduce: lifted tuple escapes the kernel of T");
        const KTuple cand = KTuple::from_indices(std::move(lifted));
        ++rep.candidates;
        if (!validate(z, cand) || (accept && !accept(cand))) continue;
        ++rep.lifted;
        if (!rep.outcome) rep.outcome = cand;
        if (!budget.run_all) break;
    }
    rep.wall_ms = elapsed_ms(start);
    return rep;
}

OracleOutcome Padding::lift(const KTuple& t) const {
    std::vector<std::size_t> out;
    for (auto i : t.indices()) {
        const std::size_t j = perm(i);
        if (j >= original) return std::nullopt;
        out.push_back(j);
    }
    return KTuple::from_indices(std::move(out));
}

Padding make_padding(const Instance& z, std::size_t r_target, SeededRng& rng) {
    const std::size_t r = list_size(z);
    if (r_target < r) throw ParameterError("padding: target size below the input size");
    Permutation perm = sample_permutation(r_target, rng);
    Instance padded = std::visit(
        [&](const auto& in) -> Instance {
            using T = std::decay_t<decltype(in)>;
            const auto e = in.elements();
            std::vector<typename decltype(e)::value_type> combined(e.begin(), e.end());
            combined.reserve(r_target);
            for (std::size_t i = r; i < r_target; ++i) {
                if constexpr (std::is_same_v<T, XorInstance>)
                    combined.push_back(rng.bits(in.n()));
                else if constexpr (std::is_same_v<T, SumInstance>)
                    combined.push_back(rng.uniform_int(-in.bound(), in.bound()));
                else
                    combined.push_back(rng.uniform_below(in.modulus()));
            }
            std::vector<typename decltype(e)::value_type> out(r_target);
            for (std::size_t i = 0; i < r_target; ++i) out[i] = combined[perm(i)];
            if constexpr (std::is_same_v<T, XorInstance>)
                return XorInstance(in.k(), in.n(), std::move(out));
            else if constexpr (std::is_same_v<T, SumInstance>)
                return SumInstance(in.k(), in.bound(), std::move(out));
            else
                return MSumInstance(in.k(), in.modulus(), std::move(out));
        },
        z);
    return Padding{std::move(padded), std::move(perm), r};
}

ReductionReport pad_reduce(const Instance& z, std::size_t r_target, const Oracle& oracle, SeededRng& rng) {
    require_family(oracle, family_of(z), "pad_reduce");
    const auto start = Clock::now();
    ReductionReport rep;
    const Padding pad = make_padding(z, r_target, rng);
    ++rep.calls;
    const OracleOutcome k = checked_oracle(oracle)(pad.padded, rng);
    if (k) {
        ++rep.successes;
        ++rep.candidates;
        if (auto back = pad.lift(*k); back && validate(z, *back)) {
            ++rep.lifted;
            rep.outcome = back;
        }
    }
    rep.wall_ms = elapsed_ms(start);
    return rep;
}

ReductionReport pad_reduce_xor(const XorInstance& z, std::size_t d, const Oracle& oracle, SeededRng& rng) {
    if (d < 1) throw ParameterError("pad_reduce_xor: d must be >= 1");
    return pad_reduce(z, d * z.r(), oracle, rng);
}

ReductionReport pad_reduce_sum(const Instance& z, std::size_t r_target, const Oracle& oracle, SeededRng& rng) {
    if (family_of(z) == Family::kXor) throw ParameterError("pad_reduce_sum: needs a SUM or MSUM instance");
    return pad_reduce(z, r_target, oracle, rng);
}

Oracle padded_oracle(Oracle inner, std::size_t factor) {
    if (factor < 1) throw ParameterError("padded_oracle: factor must be >= 1");
    OracleInfo info{inner.info().name + "+pad" + std::to_string(factor), inner.info().family};
    return Oracle(std::move(info), [inner = std::move(inner), factor](const Instance& x, SeededRng& rng) -> OracleOutcome {
        return pad_reduce(x, factor * list_size(x), inner, rng).outcome;
    });
}

ReductionReport xor_theorem_pipeline(const XorInstance& z, unsigned m, const Oracle& oracle,
                                     const ReductionBudget& budget, SeededRng& rng, std::size_t pad_factor) {
    require_family(oracle, Family::kXor, "xor_theorem_pipeline");
    if (2 * m < z.n() || m > z.n()) throw ParameterError("xor_theorem_pipeline: need n/2 <= m <= n");
    const std::size_t d = pad_factor == 0 ? z.k() : pad_factor;
    return xor_reduce(z, m, padded_oracle(oracle, d), budget, rng);
}

std::pair<MSumInstance, SumObfuscation> obfuscate_msum(const MSumInstance& z, std::uint64_t p, std::uint64_t q,
                                                       SeededRng& rng) {
    if (z.modulus() != p * q) throw ParameterError("obfuscate_msum: instance modulus must equal p*q");
    SumObfuscationKeys keys = SumObfuscationKeys::sample(p, q, rng);
    Permutation perm = sample_permutation(z.r(), rng);
    std::vector<std::uint64_t> y(z.r());
    for (std::size_t i = 0; i < z.r(); ++i) y[i] = obfuscate_residue(keys, z.elements()[perm(i)]);
    return {MSumInstance(z.k(), p, std::move(y)), SumObfuscation{keys, std::move(perm)}};
}

std::uint64_t default_msum_iterations(double c, double beta, std::uint64_t q, std::size_t k) {
    const double lq = std::log(static_cast<double>(q));
    if (!(lq > 0)) return 1;
    const double l = std::ceil(c * beta * static_cast<double>(q) / (std::sqrt(static_cast<double>(k)) * lq));
    return l < 1 ? 1 : static_cast<std::uint64_t>(l);
}

ReductionReport msum_reduce(const MSumInstance& z, std::uint64_t p, std::uint64_t q, const Oracle& oracle,
                            const ReductionBudget& budget, SeededRng& rng, double c) {
    require_family(oracle, Family::kMSum, "msum_reduce");
    SumObfuscationKeys{1, 1, p, q}.check();
    if (z.modulus() != p * q) throw ParameterError("msum_reduce: instance modulus must equal p*q");
    const auto start = Clock::now();
    ReductionReport rep;
    rep.p = p;
    rep.q = q;

    std::uint64_t iterations = budget.iterations;
    if (iterations == 0) {
        double beta = 0;
        if (budget.beta_hint) {
            beta = *budget.beta_hint;
        } else {
            SeededRng pilot = rng.child(~0ULL);
            beta = pilot_beta(oracle, MSumInstance(z.k(), p, std::vector<std::uint64_t>(z.r(), 0)), 32, pilot);
            rep.pilot_calls = 32;
        }
        iterations = default_msum_iterations(c, beta, q, z.k());
    }

    const Oracle checked = checked_oracle(oracle);
    for (std::uint64_t l = 0; l < iterations; ++l) {
        if (remaining_calls(budget, rep.calls) == 0 || out_of_time(budget, start)) break;
        SeededRng it = rng.child(l);
        auto [y, obf] = obfuscate_msum(z, p, q, it);
        ++rep.calls;
        const OracleOutcome k = checked(Instance(y), it);
        if (!k) continue;
        ++rep.successes;
        std::vector<std::size_t> lifted;
        for (auto i : k->indices()) lifted.push_back(obf.P(i));
        const KTuple cand = KTuple::from_indices(std::move(lifted));
        ++rep.candidates;
        if (!validate(z, cand)) continue;
        ++rep.lifted;
        if (!rep.outcome) rep.outcome = cand;
        if (!budget.run_all) break;
    }
    rep.wall_ms = elapsed_ms(start);
    return rep;
}

std::size_t sum_to_msum_rprime(std::size_t r, std::uint64_t modulus, std::int64_t bound) {
    const unsigned __int128 num = static_cast<unsigned __int128>(r) * modulus;
    const unsigned __int128 den = static_cast<unsigned __int128>(4) * static_cast<std::uint64_t>(bound);
    return static_cast<std::size_t>((num + den - 1) / den);
}

std::optional<SumToMSum> prepare_sum_to_msum(const SumInstance& z, std::uint64_t modulus, SeededRng& rng) {
    const std::int64_t n = z.bound();
    if (modulus < 1 || static_cast<unsigned __int128>(modulus) > static_cast<unsigned __int128>(2) * n + 1)
        throw ParameterError("sum_to_msum: need 1 <= M <= 2N + 1");
    const auto m = static_cast<std::int64_t>(modulus);
    // Odd M keeps {-(M-1)/2..(M-1)/2}, even M keeps {-M/2..M/2-1}.
    const std::int64_t lo = (m % 2) ? -(m - 1) / 2 : -m / 2;
    const std::int64_t hi = (m % 2) ? (m - 1) / 2 : m / 2 - 1;
    const std::size_t r_prime = sum_to_msum_rprime(z.r(), modulus, n);

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < z.r(); ++i)
        if (z.elements()[i] >= lo && z.elements()[i] <= hi) kept.push_back(i);
    const std::size_t survivors = kept.size();
    if (survivors < r_prime || r_prime < z.k()) return std::nullopt;
    kept.resize(r_prime);

    const std::size_t k = z.k();
    detail::MSumDomain dom{modulus};
    std::vector<std::uint64_t> masks(k);
    std::uint64_t total = 0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        masks[j] = rng.uniform_below(modulus);
        total = dom.combine(total, masks[j]);
    }
    masks[k - 1] = dom.need(total);

    std::vector<std::uint64_t> x(r_prime);
    for (std::size_t i = 0; i < r_prime; ++i) {
        const std::uint64_t y = reduce_signed(z.elements()[kept[i]], modulus);
        x[i] = dom.combine(y, masks[rng.uniform_below(k)]);
    }
    return SumToMSum{MSumInstance(k, modulus, std::move(x)), std::move(kept), r_prime, survivors};
}

OracleOutcome finish_sum_to_msum(const SumInstance& z, const SumToMSum& prep, const KTuple& k_prime) {
    std::vector<std::size_t> idx;
    for (auto i : k_prime.indices()) {
        if (i >= prep.origin.size()) return std::nullopt;
        idx.push_back(prep.origin[i]);
    }
    KTuple k = KTuple::from_indices(std::move(idx));
    if (!validate(z, k)) return std::nullopt;
    return k;
}

ReductionReport sum_to_msum(const SumInstance& z, std::uint64_t modulus, const Oracle& oracle, SeededRng& rng) {
    require_family(oracle, Family::kMSum, "sum_to_msum");
    const auto start = Clock::now();
    ReductionReport rep;
    const auto prep = prepare_sum_to_msum(z, modulus, rng);
    if (!prep) {
        rep.note = "r1 < r'";
        rep.wall_ms = elapsed_ms(start);
        return rep;
    }
    ++rep.calls;
    const OracleOutcome k = checked_oracle(oracle)(Instance(prep->x), rng);
    if (k) {
        ++rep.successes;
        ++rep.candidates;
        if (auto back = finish_sum_to_msum(z, *prep, *k)) {
            ++rep.lifted;
            rep.outcome = back;
        }
    }
    rep.wall_ms = elapsed_ms(start);
    return rep;
}

Oracle sum_as_msum_oracle(Oracle dense, std::size_t pad_factor) {
    require_family(dense, Family::kSum, "sum_as_msum_oracle");
    if (pad_factor < 1) throw ParameterError("sum_as_msum_oracle: pad factor must be >= 1");
    OracleInfo info{dense.info().name + "/modp", Family::kMSum};
    return Oracle(std::move(info), [dense = std::move(dense), pad_factor](const Instance& inst, SeededRng& rng) -> OracleOutcome {
        const auto* y = std::get_if<MSumInstance>(&inst);
        if (!y) throw ParameterError("sum_as_msum_oracle: expects an MSUM instance");
        const std::uint64_t p = y->modulus();
        std::vector<std::int64_t> s(y->r());
        for (std::size_t i = 0; i < y->r(); ++i) s[i] = centered(y->elements()[i], p);
        const SumInstance as_sum(y->k(), std::max<std::int64_t>(1, static_cast<std::int64_t>(p / 2)), std::move(s));
        // An integer solution is also a solution mod p.
        return pad_reduce(as_sum, pad_factor * as_sum.r(), dense, rng).outcome;
    });
}

namespace {

bool interval_has_prime(std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t x = lo; x < hi; ++x)
        if (is_prime(x)) return true;
    return false;
}

}  // namespace

ReductionReport sum_theorem_pipeline(const SumInstance& z, std::uint64_t M, const Oracle& dense,
                                     const ReductionBudget& budget, SeededRng& rng, const SumPipelineOptions& options) {
    require_family(dense, Family::kSum, "sum_theorem_pipeline");
    const auto n = static_cast<std::uint64_t>(z.bound());
    if (static_cast<unsigned __int128>(M) * M < n || M > n) throw ParameterError("sum_theorem_pipeline: need sqrt(N) <= M <= N");
    if (budget.call_cap == 0 && options.max_attempts == 0)
        throw ParameterError("sum_theorem_pipeline: set a call cap or an attempt cap");
    if (options.sparsify_factor < 1) throw ParameterError("sum_theorem_pipeline: sparsify factor must be >= 1");

    const auto start = Clock::now();
    ReductionReport rep;
    const Oracle mod_p = sum_as_msum_oracle(dense, options.inner_pad_factor);
    std::optional<double> beta = budget.beta_hint;

    // An attempt whose bridge fails makes no oracle call, so it is charged one unit of the call cap.
    const std::uint64_t attempt_cap = options.max_attempts ? options.max_attempts : budget.call_cap;
    for (std::uint64_t a = 0; a < attempt_cap; ++a) {
        const std::uint64_t left = remaining_calls(budget, rep.calls);
        if (left == 0 || out_of_time(budget, start)) break;
        ++rep.attempts;
        SeededRng ar = rng.child(a);

        const std::uint64_t p = sample_prime(M, 2 * M, ar);
        const std::uint64_t q_lo = (n + 2 * p - 1) / (2 * p);
        const std::uint64_t q_hi = (n + p - 1) / p;
        if (q_lo >= p) throw ParameterError("sum_theorem_pipeline: N/2p >= p, no admissible q");
        std::uint64_t q = 0;
        const std::uint64_t lo = std::max<std::uint64_t>(q_lo, 2);
        if (lo < q_hi && (q_hi - lo > 4096 || interval_has_prime(lo, q_hi))) q = sample_prime(lo, q_hi, ar);
        rep.p = p;
        rep.q = q;

        const Padding sparse = make_padding(z, options.sparsify_factor * z.r(), ar);
        const auto& big = std::get<SumInstance>(sparse.padded);
        const std::uint64_t modulus = q ? p * q : p;
        const auto prep = prepare_sum_to_msum(big, modulus, ar);
        if (!prep) continue;

        if (!beta && budget.iterations == 0 && q) {
            SeededRng pilot = rng.child(~0ULL);
            beta = pilot_beta(mod_p, MSumInstance(z.k(), p, std::vector<std::uint64_t>(prep->r_prime, 0)), 32, pilot);
            rep.pilot_calls += 32;
        }

        OracleOutcome k_prime;
        if (q) {
            ReductionBudget inner;
            inner.iterations = budget.iterations;
            inner.beta_hint = beta;
            inner.call_cap = budget.call_cap ? left : 0;
            const ReductionReport sub = msum_reduce(prep->x, p, q, mod_p, inner, ar, options.c);
            rep.absorb(sub);
            k_prime = sub.outcome;
        } else {
            ++rep.calls;
            k_prime = checked_oracle(mod_p)(Instance(prep->x), ar);
            if (k_prime) ++rep.successes;
        }
        if (!k_prime) continue;

        const OracleOutcome in_big = finish_sum_to_msum(big, *prep, *k_prime);
        if (!in_big) continue;
        const OracleOutcome back = sparse.lift(*in_big);
        if (back && validate(z, *back)) {
            rep.outcome = back;
            break;
        }
    }
    if (!rep.q) rep.note = "no prime q in [N/2p, N/p); bridged mod p";
    rep.wall_ms = elapsed_ms(start);
    return rep;
}

}  // namespace ksumforge
