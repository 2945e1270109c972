#pragma once

#include <optional>
#include <span>

namespace noisecal::stats {

double mean(std::span<const double> v);

// Population variance (divide by n).
double variance_pop(std::span<const double> v);

// Sample variance about the mean with divisor n (used for correlation only,
// where the divisor cancels).
double sum_sq_dev(std::span<const double> v);

// Pearson correlation; empty when either argument has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta function I_x(a, b), relative tolerance ~1e-12.
double reg_inc_beta(double a, double b, double x);

// Two-tailed p-value of a t statistic with df degrees of freedom.
double t_two_tailed_p(double t, double df);

// Two-tailed p-value for a Pearson r over n pairs (t with n-2 df).
double pearson_p_value(double r, std::size_t n);

struct Hinges {
    double q1 = 0.0;
    double q3 = 0.0;
};

// Tukey hinges: medians of the lower/upper halves, excluding the overall
// median when the length is odd. Input need not be sorted.
Hinges tukey_hinges(std::span<const double> v);

// Linear-interpolation percentile of a sorted series, p in [0, 100].
double percentile_sorted(std::span<const double> sorted, double p);

// Energetic (Leq) mean: 10*log10(mean(10^(L/10))).
double energetic_mean(std::span<const double> levels);

}  // namespace noisecal::stats
