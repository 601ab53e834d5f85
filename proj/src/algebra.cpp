#include "ksumforge/algebra.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

namespace ksumforge {

F2Matrix::F2Matrix(unsigned cols, std::vector<std::uint64_t> rows) : cols_(cols), rows_(std::move(rows)) {
    if (cols_ < 1 || cols_ > kMaxWidth) throw ParameterError("F2Matrix: cols must be in [1, 63]");
    if (rows_.empty() || rows_.size() > kMaxWidth) throw ParameterError("F2Matrix: rows must be in [1, 63]");
    for (auto w : rows_)
        if (w > width_mask(cols_)) throw ParameterError("F2Matrix: row exceeds column count");
}

F2Matrix F2Matrix::identity(unsigned n) {
    std::vector<std::uint64_t> rows(n);
    for (unsigned i = 0; i < n; ++i) rows[i] = 1ULL << i;
    return F2Matrix(n, std::move(rows));
}

F2Matrix F2Matrix::zero(unsigned rows, unsigned cols) {
    return F2Matrix(cols, std::vector<std::uint64_t>(rows, 0));
}

std::uint64_t F2Matrix::apply(std::uint64_t v) const noexcept {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < rows_.size(); ++i)
        out |= static_cast<std::uint64_t>(std::popcount(rows_[i] & v) & 1) << i;
    return out;
}

std::size_t f2_rank(const F2Matrix& m) {
    std::vector<std::uint64_t> rows = m.row_words();
    std::size_t rank = 0;
    for (unsigned col = 0; col < m.cols() && rank < rows.size(); ++col) {
        const std::uint64_t bit = 1ULL << col;
        std::size_t pivot = rank;
        while (pivot < rows.size() && !(rows[pivot] & bit)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != rank && (rows[i] & bit)) rows[i] ^= rows[rank];
        ++rank;
    }
    return rank;
}

F2Matrix sample_full_rank(unsigned m, unsigned n, SeededRng& rng) {
    if (m < 1 || m > n || n > kMaxWidth) throw ParameterError("sample_full_rank: need 1 <= m <= n <= 63");
    // Acceptance probability is prod_{i<m} (1 - 2^{i-n}) > 0.288.
    for (;;) {
        std::vector<std::uint64_t> rows(m);
        for (auto& w : rows) w = rng.bits(n);
        F2Matrix t(n, std::move(rows));
        if (f2_rank(t) == m) return t;
    }
}

BitVec apply_f2(const F2Matrix& t, const BitVec& v) {
    if (v.width() != t.cols()) throw ParameterError("apply_f2: vector width differs from matrix columns");
    return BitVec(t.rows(), t.apply(v.bits()));
}

Permutation::Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for (auto v : image_) {
        if (v >= image_.size() || seen[v]) throw ParameterError("Permutation: image is not a bijection");
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t size) {
    std::vector<std::size_t> image(size);
    std::iota(image.begin(), image.end(), std::size_t{0});
    return Permutation(std::move(image));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) inv[image_[i]] = i;
    return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
    if (other.size() != size()) throw ParameterError("Permutation::compose: size mismatch");
    std::vector<std::size_t> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = image_[other.image_[i]];
    return Permutation(std::move(out));
}

Permutation sample_permutation(std::size_t size, SeededRng& rng) {
    std::vector<std::size_t> image(size);
    std::iota(image.begin(), image.end(), std::size_t{0});
    for (std::size_t i = size; i > 1; --i) std::swap(image[i - 1], image[rng.uniform_below(i)]);
    return Permutation(std::move(image));
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t modulus) noexcept {
    std::uint64_t result = 1 % modulus;
    base %= modulus;
    while (exp) {
        if (exp & 1) result = mulmod_wide(result, base, modulus);
        base = mulmod_wide(base, base, modulus);
        exp >>= 1;
    }
    return result;
}

std::uint64_t sample_unit(std::uint64_t modulus, SeededRng& rng) {
    if (modulus < 2) throw ParameterError("sample_unit: modulus must be >= 2");
    for (;;) {
        const std::uint64_t a = rng.uniform_below(modulus);
        if (std::gcd(a, modulus) == 1) return a;
    }
}

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t modulus) {
    if (modulus == 0) throw ParameterError("mod_inverse: zero modulus");
    if (modulus == 1) return 0;
    __int128 old_r = static_cast<__int128>(a % modulus), r = modulus;
    __int128 old_s = 1, s = 0;
    while (r != 0) {
        const __int128 quot = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - quot * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - quot * s);
    }
    if (old_r != 1) throw ParameterError("mod_inverse: argument is not a unit");
    __int128 inv = old_s % static_cast<__int128>(modulus);
    if (inv < 0) inv += modulus;
    return static_cast<std::uint64_t>(inv);
}

bool is_prime(std::uint64_t x) noexcept {
    if (x < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (x % p == 0) return x == p;
    }
    std::uint64_t d = x - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // These twelve bases are a proven witness set for every n < 3.3e24.
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t y = powmod(a, d, x);
        if (y == 1 || y == x - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            y = mulmod_wide(y, y, x);
            if (y == x - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t sample_prime(std::uint64_t lo, std::uint64_t hi, SeededRng& rng, std::uint64_t max_attempts) {
    if (lo >= hi) throw ParameterError("sample_prime: need lo < hi");
    if (max_attempts == 0)
        max_attempts = 64 * static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::log2(static_cast<double>(hi)))));
    for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
        const std::uint64_t c = lo + rng.uniform_below(hi - lo);
        if (is_prime(c)) return c;
    }
    throw CapacityError("sample_prime: attempt cap exhausted; interval plausibly holds no prime");
}

std::uint64_t next_prime(std::uint64_t x) {
    for (std::uint64_t c = x + 1;; ++c)
        if (is_prime(c)) return c;
}

void SumObfuscationKeys::check() const {
    if (!is_prime(p) || !is_prime(q)) throw ParameterError("obfuscation keys: p and q must be prime");
    if (p < q) throw ParameterError("obfuscation keys: need p >= q");
    if (static_cast<unsigned __int128>(p) * q >= (static_cast<unsigned __int128>(1) << 63))
        throw ParameterError("obfuscation keys: pq must be < 2^63");
    if (alpha >= p * q || std::gcd(alpha, p * q) != 1) throw ParameterError("obfuscation keys: alpha not a unit mod pq");
    if (gamma == 0 || gamma >= p) throw ParameterError("obfuscation keys: gamma not in Z_p^*");
}

SumObfuscationKeys SumObfuscationKeys::sample(std::uint64_t p, std::uint64_t q, SeededRng& rng) {
    SumObfuscationKeys keys{1, 1, p, q};
    keys.check();
    keys.alpha = sample_unit(p * q, rng);
    keys.gamma = 1 + rng.uniform_below(p - 1);
    return keys;
}

std::uint64_t obfuscate_residue(const SumObfuscationKeys& keys, std::uint64_t z) noexcept {
    const std::uint64_t pq = keys.p * keys.q;
    const std::uint64_t w = mulmod_wide(keys.alpha, z, pq);
    const auto rounded = static_cast<std::uint64_t>(round_div(static_cast<std::int64_t>(w), static_cast<std::int64_t>(keys.q)));
    // rounded may equal p, hence the reduction before scaling by gamma.
    return mulmod_wide(keys.gamma, rounded % keys.p, keys.p);
}

}  // namespace ksumforge
