#include "ksumforge/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace ksumforge {

namespace {

ChiSquare finish(double stat, double dof) {
    ChiSquare out{stat, dof, 1.0};
    if (dof >= 1) out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
    return out;
}

}  // namespace

double normal_quantile_two_sided(double confidence) {
    return boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
    if (trials == 0) return {0, 1};
    const double z = normal_quantile_two_sided(confidence);
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double denom = 1 + z * z / n;
    const double centre = (phat + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& observed) {
    return chi_square_fit(observed, std::vector<double>(observed.size(), 1.0 / static_cast<double>(observed.size())));
}

ChiSquare chi_square_fit(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities) {
    if (observed.size() != probabilities.size() || observed.size() < 2)
        throw std::invalid_argument("chi_square_fit: need matching histograms with at least two bins");
    double total = 0;
    for (auto o : observed) total += static_cast<double>(o);
    double stat = 0;
    double bins = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = total * probabilities[i];
        if (e <= 0) {
            if (observed[i] != 0) return {INFINITY, 0, 0};
            continue;
        }
        const double d = static_cast<double>(observed[i]) - e;
        stat += d * d / e;
        bins += 1;
    }
    return finish(stat, bins - 1);
}

ChiSquare chi_square_two_sample(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("chi_square_two_sample: bin counts differ");
    double na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    double stat = 0;
    double bins = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0) continue;
        const double ea = col * na / (na + nb);
        const double eb = col * nb / (na + nb);
        stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
        bins += 1;
    }
    return finish(stat, bins - 1);
}

bool within_binomial_sigma(std::uint64_t observed, std::uint64_t trials, double p, double sigmas) {
    const double n = static_cast<double>(trials);
    const double sd = std::sqrt(n * p * (1 - p));
    return std::abs(static_cast<double>(observed) - n * p) <= sigmas * sd + 1e-9;
}

}  // namespace ksumforge
