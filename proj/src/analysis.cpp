#include "ksumforge/analysis.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ksumforge/algebra.hpp"
#include "ksumforge/parallel.hpp"
#include "ksumforge/solvers.hpp"

namespace ksumforge {

PairSample sample_mrt(std::size_t k, unsigned m, std::size_t r, unsigned t, SeededRng& rng) {
    if (m < 1 || m + t > kMaxWidth) throw ParameterError("sample_mrt: need 1 <= m and m + t <= 63");
    const unsigned n = m + t;
    std::vector<std::uint64_t> z(r);
    for (auto& v : z) v = rng.bits(n);
    const F2Matrix t1 = sample_full_rank(m, n, rng);
    const F2Matrix t2 = sample_full_rank(m, n, rng);
    std::vector<std::uint64_t> x(r), y(r);
    for (std::size_t i = 0; i < r; ++i) {
        x[i] = t1.apply(z[i]);
        y[i] = t2.apply(z[i]);
    }
    std::ostringstream keys;
    keys << "m=" << m << " t=" << t;
    return {XorInstance(k, m, std::move(x)), XorInstance(k, m, std::move(y)), "mrt", keys.str()};
}

std::int64_t sigma_min(std::uint64_t q) noexcept { return -static_cast<std::int64_t>(q / 2); }

std::int64_t sigma_max(std::uint64_t q) noexcept { return static_cast<std::int64_t>((q + 1) / 2) - 1; }

PairSample sample_pqr(std::size_t k, std::uint64_t p, std::uint64_t q, std::size_t r, PqrMode mode, SeededRng& rng) {
    SumObfuscationKeys{1, 1, p, q}.check();
    const std::uint64_t pq = p * q;
    std::vector<std::uint64_t> x(r), y(r);
    std::ostringstream keys;
    if (mode == PqrMode::kDefinition) {
        std::vector<std::uint64_t> z(r);
        for (auto& v : z) v = rng.uniform_below(pq);
        const auto k1 = SumObfuscationKeys::sample(p, q, rng);
        const auto k2 = SumObfuscationKeys::sample(p, q, rng);
        for (std::size_t i = 0; i < r; ++i) {
            x[i] = obfuscate_residue(k1, z[i]);
            y[i] = obfuscate_residue(k2, z[i]);
        }
        keys << "alpha1=" << k1.alpha << " gamma1=" << k1.gamma << " alpha2=" << k2.alpha << " gamma2=" << k2.gamma;
    } else {
        for (auto& v : x) v = rng.uniform_below(p);
        std::vector<std::int64_t> sigma(r);
        for (auto& s : sigma) s = rng.uniform_int(sigma_min(q), sigma_max(q));
        const std::uint64_t alpha = sample_unit(pq, rng);
        const std::uint64_t gamma = 1 + rng.uniform_below(p - 1);
        const std::uint64_t gamma2 = 1 + rng.uniform_below(p - 1);
        for (std::size_t i = 0; i < r; ++i) {
            const std::uint64_t w = mulmod_wide(alpha, reduce_signed(sigma[i], pq), pq);
            const auto u = static_cast<std::uint64_t>(round_div(static_cast<std::int64_t>(w), static_cast<std::int64_t>(q))) % p;
            y[i] = (mulmod_wide(gamma, x[i], p) + mulmod_wide(gamma2, u, p)) % p;
        }
        keys << "alpha=" << alpha << " gamma=" << gamma << " gamma'=" << gamma2;
    }
    return {MSumInstance(k, p, std::move(x)), MSumInstance(k, p, std::move(y)),
            mode == PqrMode::kDefinition ? "pqr-definition" : "pqr-claim", keys.str()};
}

PairSample draw_pair(const PairSpec& spec, SeededRng& rng) {
    if (const auto* s = std::get_if<XorPairSpec>(&spec)) return sample_mrt(s->k, s->m, s->r, s->t, rng);
    const auto& a = std::get<ArithPairSpec>(spec);
    return sample_pqr(a.k, a.p, a.q, a.r, a.mode, rng);
}

namespace {

OracleOutcome run_permuted(const Oracle& oracle, const Instance& inst, SeededRng& rng) {
    const Permutation perm = sample_permutation(list_size(inst), rng);
    const Instance shuffled = std::visit(
        [&](const auto& in) -> Instance {
            using T = std::decay_t<decltype(in)>;
            std::vector<typename decltype(in.elements())::value_type> out(in.r());
            for (std::size_t i = 0; i < in.r(); ++i) out[i] = in.elements()[perm(i)];
            if constexpr (std::is_same_v<T, XorInstance>)
                return XorInstance(in.k(), in.n(), std::move(out));
            else if constexpr (std::is_same_v<T, SumInstance>)
                return SumInstance(in.k(), in.bound(), std::move(out));
            else
                return MSumInstance(in.k(), in.modulus(), std::move(out));
        },
        inst);
    const OracleOutcome k = oracle(shuffled, rng);
    if (!k) return k;
    std::vector<std::size_t> back;
    for (auto i : k->indices()) back.push_back(perm(i));
    return KTuple::from_indices(std::move(back));
}

}  // namespace

CollisionEstimate estimate_collision(const Oracle& oracle, const PairSpec& spec, std::uint64_t trials,
                                     SeededRng& rng, unsigned threads, double slack) {
    if (trials < 1) throw ParameterError("estimate_collision: trials must be >= 1");
    const Oracle checked = checked_oracle(oracle);
    // 0: x failed, 1: x ok only, 2: both ok, 3: collision
    std::vector<std::uint8_t> outcome(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        SeededRng trial = rng.child(i);
        const PairSample pair = draw_pair(spec, trial);
        SeededRng rx = trial.child(1), ry = trial.child(2);
        const OracleOutcome kx = run_permuted(checked, pair.x, rx);
        if (!kx) return;
        const OracleOutcome ky = run_permuted(checked, pair.y, ry);
        outcome[i] = !ky ? 1 : (*kx == *ky ? 3 : 2);
    });

    CollisionEstimate est;
    est.spec = spec;
    est.trials = trials;
    for (auto o : outcome) {
        est.x_successes += o >= 1;
        est.both_successes += o >= 2;
        est.collisions += o == 3;
    }
    est.estimate = static_cast<double>(est.collisions) / static_cast<double>(trials);
    est.ci = wilson_interval(est.collisions, trials, 0.99);
    if (const auto* s = std::get_if<XorPairSpec>(&spec)) {
        const double c = static_cast<double>(binomial(s->r, s->k));
        const int t = static_cast<int>(s->t), m = static_cast<int>(s->m);
        est.paper_bound = std::ldexp(1.0, 2 - 2 * t);
        est.theorem_bound = std::ldexp(1.0, -2 * t) + std::ldexp(1.0, m - t) / c + std::ldexp(1.0, -t + 1 - m);
        est.slack = 1;
    } else {
        const auto& a = std::get<ArithPairSpec>(spec);
        const double q = static_cast<double>(a.q), p = static_cast<double>(a.p);
        const double c = static_cast<double>(binomial(a.r, a.k));
        est.theorem_bound = std::log(q) / (q * q) + p / (q * c);
        est.slack = slack;
        est.paper_bound = slack * est.theorem_bound;
    }
    return est;
}

std::uint64_t magnitude_terms(std::uint64_t p, std::uint64_t q, std::size_t r) {
    const std::uint64_t pq = p * q;
    std::uint64_t phi = 0;
    for (std::uint64_t a = 1; a < pq; ++a) phi += std::gcd(a, pq) == 1;
    unsigned __int128 t = static_cast<unsigned __int128>(phi) * phi * (p - 1) * (p - 1);
    for (std::size_t i = 0; i < r; ++i) {
        t *= pq;
        if (t > ~0ULL) return ~0ULL;
    }
    return static_cast<std::uint64_t>(t);
}

namespace {

struct Enumeration {
    std::uint64_t p, q, pq;
    std::size_t r;
    std::vector<std::uint64_t> units;
    // rounded[a * pq + z] = round(alpha_a z mod pq / q) mod p
    std::vector<std::uint32_t> rounded;
    std::vector<std::complex<long double>> roots;

    Enumeration(std::uint64_t p_, std::uint64_t q_, std::size_t r_, std::uint64_t budget) : p(p_), q(q_), pq(p_ * q_), r(r_) {
        if (!is_prime(p) || !is_prime(q)) throw ParameterError("magnitude: p and q must be prime");
        if (magnitude_terms(p, q, r) > budget) throw CapacityError("magnitude: enumeration budget exceeded");
        for (std::uint64_t a = 1; a < pq; ++a)
            if (std::gcd(a, pq) == 1) units.push_back(a);
        rounded.resize(units.size() * pq);
        for (std::size_t a = 0; a < units.size(); ++a)
            for (std::uint64_t z = 0; z < pq; ++z) {
                const std::uint64_t w = mulmod_wide(units[a], z, pq);
                rounded[a * pq + z] = static_cast<std::uint32_t>(
                    static_cast<std::uint64_t>(round_div(static_cast<std::int64_t>(w), static_cast<std::int64_t>(q))) % p);
            }
        const long double tau = 2 * std::acos(-1.0L);
        for (std::uint64_t j = 0; j < p; ++j)
            roots.emplace_back(std::cos(tau * j / p), std::sin(tau * j / p));
    }

    /// Calls fn(z) for every z in Z_pq^r.
    template <class Fn>
    void for_each_z(Fn&& fn) const {
        std::vector<std::uint64_t> z(r, 0);
        for (;;) {
            fn(z);
            std::size_t i = 0;
            while (i < r && ++z[i] == pq) z[i++] = 0;
            if (i == r) return;
        }
    }

    /// <S, round(alpha z / q) mod p> mod p for every unit alpha.
    void inner_products(const Character& S, const std::vector<std::uint64_t>& z, std::vector<std::uint64_t>& out) const {
        out.assign(units.size(), 0);
        for (std::size_t a = 0; a < units.size(); ++a) {
            std::uint64_t s = 0;
            for (std::size_t i = 0; i < r; ++i) s = (s + S.S[i] * rounded[a * pq + z[i]]) % p;
            out[a] = s;
        }
    }
};

void check_character(const Character& S, std::uint64_t p) {
    if (S.p != p) throw ParameterError("character modulus mismatch");
    for (auto v : S.S)
        if (v >= p) throw ParameterError("character entries must lie in Z_p");
}

}  // namespace

MagnitudeResult magnitude_exact(const Character& S, std::uint64_t q, std::uint64_t budget) {
    const std::uint64_t p = S.p;
    check_character(S, p);
    const Enumeration en(p, q, S.S.size(), budget);
    std::complex<long double> acc = 0;
    std::uint64_t terms = 0;
    std::vector<std::uint64_t> s;
    en.for_each_z([&](const std::vector<std::uint64_t>& z) {
        en.inner_products(S, z, s);
        for (std::size_t a1 = 0; a1 < s.size(); ++a1)
            for (std::uint64_t g1 = 1; g1 < p; ++g1) {
                const std::uint64_t e1 = g1 * s[a1] % p;
                for (std::size_t a2 = 0; a2 < s.size(); ++a2)
                    for (std::uint64_t g2 = 1; g2 < p; ++g2) {
                        const std::uint64_t e2 = g2 * s[a2] % p;
                        acc += en.roots[(e1 + p - e2) % p];
                        ++terms;
                    }
            }
    });
    MagnitudeResult res;
    res.S = S;
    res.q = q;
    res.value = static_cast<double>(acc.real() / terms);
    res.imag = static_cast<double>(acc.imag() / terms);
    res.method = "exact-enumeration";
    res.terms = terms;
    return res;
}

Fraction joint_zero_probability(const Character& T, std::uint64_t q, std::uint64_t budget) {
    const std::uint64_t p = T.p;
    check_character(T, p);
    const std::size_t r = T.S.size();
    const Enumeration en(p, q, r, budget);
    std::uint64_t count = 0, total = 0;
    en.for_each_z([&](const std::vector<std::uint64_t>& z) {
        // Keys with <T, x> = 0, x computed from the obfuscation map itself.
        std::uint64_t zero = 0, keys = 0;
        for (auto alpha : en.units)
            for (std::uint64_t gamma = 1; gamma < p; ++gamma) {
                const SumObfuscationKeys k{alpha, gamma, p, q};
                std::uint64_t s = 0;
                for (std::size_t i = 0; i < r; ++i) s = (s + T.S[i] * obfuscate_residue(k, z[i])) % p;
                zero += s == 0;
                ++keys;
            }
        count += zero * zero;
        total += keys * keys;
    });
    return {count, total};
}

double magnitude_from_probability(const Character& T, std::uint64_t q, std::uint64_t budget) {
    const Fraction pr = joint_zero_probability(T, q, budget);
    const long double p = static_cast<long double>(T.p);
    const long double prob = static_cast<long double>(pr.num) / static_cast<long double>(pr.den);
    return static_cast<double>((p * p * prob - 1) / ((p - 1) * (p - 1)));
}

std::complex<double> magnitude_cross(const Character& S, const Character& S2, std::uint64_t q, std::uint64_t budget) {
    const std::uint64_t p = S.p;
    check_character(S, p);
    check_character(S2, p);
    if (S.S.size() != S2.S.size()) throw ParameterError("magnitude_cross: characters differ in length");
    const Enumeration en(p, q, S.S.size(), budget);
    std::complex<long double> acc = 0;
    std::uint64_t count = 0;
    std::vector<std::uint64_t> s1, s2;
    const long double keys = static_cast<long double>(en.units.size() * (p - 1));
    en.for_each_z([&](const std::vector<std::uint64_t>& z) {
        en.inner_products(S, z, s1);
        en.inner_products(S2, z, s2);
        std::complex<long double> a = 0, b = 0;
        for (std::size_t i = 0; i < s1.size(); ++i)
            for (std::uint64_t g = 1; g < p; ++g) {
                a += en.roots[g * s1[i] % p];
                b += en.roots[g * s2[i] % p];
            }
        acc += (a / keys) * std::conj(b / keys);
        ++count;
    });
    acc /= static_cast<long double>(count);
    return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

bool proportional(const Character& S, const Character& S2) {
    if (S.p != S2.p || S.S.size() != S2.S.size()) return false;
    for (std::uint64_t g = 1; g < S.p; ++g) {
        bool same = true;
        for (std::size_t i = 0; i < S.S.size() && same; ++i) same = g * S.S[i] % S.p == S2.S[i];
        if (same) return true;
    }
    return false;
}

std::vector<Character> projective_representatives(std::uint64_t p, std::size_t r) {
    std::vector<Character> out;
    std::vector<std::uint64_t> v(r, 0);
    for (;;) {
        std::size_t i = 0;
        while (i < r && ++v[i] == p) v[i++] = 0;
        if (i == r) break;
        std::size_t first = r;
        for (std::size_t j = r; j-- > 0;)
            if (v[j] != 0) first = j;
        if (first < r && v[first] == 1) out.push_back({v, p});
    }
    return out;
}

MagnitudeScan magnitude_bound_scan(std::uint64_t p, std::uint64_t q, std::size_t r, double slack, std::uint64_t budget) {
    MagnitudeScan scan;
    scan.p = p;
    scan.q = q;
    scan.r = r;
    scan.slack = slack;
    for (const auto& S : projective_representatives(p, r)) {
        scan.rows.push_back(magnitude_exact(S, q, budget));
        scan.max_abs = std::max(scan.max_abs, std::abs(scan.rows.back().value));
    }
    scan.max_scaled = scan.max_abs * static_cast<double>(p * q);
    return scan;
}

std::uint64_t count_quadruples(std::uint64_t q, QuadMode mode, std::uint64_t N) {
    if (q < 1 || q > 4096) throw ParameterError("count_quadruples: need 1 <= q <= 4096");
    const std::uint64_t top = (q - 1) * (q - 1);
    std::vector<std::uint32_t> cnt(top + 1, 0);
    for (std::uint64_t a = 0; a < q; ++a)
        for (std::uint64_t b = 0; b < q; ++b) ++cnt[a * b];
    std::uint64_t total = 0;
    if (mode == QuadMode::kProduct) {
        for (auto c : cnt) total += static_cast<std::uint64_t>(c) * c;
    } else {
        for (std::uint64_t v = 0; v <= std::min(N, top); ++v)
            if (N - v <= top) total += static_cast<std::uint64_t>(cnt[v]) * cnt[N - v];
    }
    return total;
}

std::uint64_t z_alpha_size(std::uint64_t alpha, std::uint64_t p, std::uint64_t q) {
    const std::uint64_t pq = p * q;
    std::uint64_t n = 0;
    for (std::int64_t s = sigma_min(q); s <= sigma_max(q); ++s) {
        const std::uint64_t w = mulmod_wide(alpha % pq, reduce_signed(s, pq), pq);
        n += w < q || w > pq - q;
    }
    return n;
}

AlignedStats aligned_sum_stats(std::uint64_t p, std::uint64_t q, std::uint64_t trials, SeededRng& rng) {
    SumObfuscationKeys{1, 1, p, q}.check();
    const std::uint64_t pq = p * q;
    AlignedStats st;
    st.p = p;
    st.q = q;
    st.trials = trials;
    double sum = 0, sum2 = 0;
    std::uint64_t draws = 0;
    auto add = [&](std::uint64_t alpha) {
        const std::uint64_t z = z_alpha_size(alpha, p, q);
        sum += static_cast<double>(z);
        sum2 += static_cast<double>(z) * static_cast<double>(z);
        st.max = std::max(st.max, z);
        ++draws;
    };
    std::uint64_t phi = 0;
    for (std::uint64_t a = 1; a < pq; ++a) phi += std::gcd(a, pq) == 1;
    if (trials == 0) {
        for (std::uint64_t a = 1; a < pq; ++a)
            if (std::gcd(a, pq) == 1) add(a);
    } else {
        for (std::uint64_t i = 0; i < trials; ++i) add(sample_unit(pq, rng));
    }
    st.mean = sum / static_cast<double>(draws);
    st.second_moment = sum2 / static_cast<double>(draws);
    st.mean_shape = 1 + static_cast<double>(q) / static_cast<double>(p);
    st.second_shape = static_cast<double>(q * q) * std::log(static_cast<double>(q)) / static_cast<double>(phi);
    return st;
}

}  // namespace ksumforge
