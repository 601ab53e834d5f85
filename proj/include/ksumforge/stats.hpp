#pragma once

// Proportion intervals and chi-square tests for the Monte-Carlo checks.

#include <cstdint>
#include <vector>

namespace ksumforge {

struct Interval {
    double lo = 0;
    double hi = 0;
};

/// Two-sided normal quantile for the given confidence (e.g. 0.99 -> 2.5758).
double normal_quantile_two_sided(double confidence);

/// Wilson score interval for successes out of trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.99);

struct ChiSquare {
    double statistic = 0;
    double dof = 0;
    double p_value = 1;
};

/// Goodness of fit of observed counts against a uniform distribution over the bins.
ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& observed);

/// Goodness of fit against expected probabilities (summing to one).
ChiSquare chi_square_fit(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities);

/// Homogeneity test of two histograms over the same bins. Bins empty in both are skipped.
ChiSquare chi_square_two_sample(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

/// |observed - expected| <= sigmas * sqrt(n p (1 - p)).
bool within_binomial_sigma(std::uint64_t observed, std::uint64_t trials, double p, double sigmas = 3.0);

}  // namespace ksumforge
