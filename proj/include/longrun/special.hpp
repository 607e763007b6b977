#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace longrun {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

/// log n(mean, var, x), the normal log-density with variance var.
inline double norm_logpdf(double x, double mean, double var) {
    const double z = x - mean;
    return -0.5 * z * z / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

inline double std_norm_logpdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

inline double std_norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// log Phi(z), accurate in the far lower tail.
double log_std_norm_cdf(double z);

/// Phi^{-1}(p) for p in (0, 1).
double std_norm_quantile(double p);

/// log(1 - exp(-x)) for x > 0.
inline double log1mexp(double x) {
    return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

double log_sum_exp(std::span<const double> values);

/// Pairwise (cascade) summation; the order depends only on the length.
double pairwise_sum(std::span<const double> values);

/// Upper Kolmogorov critical value at level 1% for sample size n (asymptotic form).
inline double ks_critical_1pct(double n) { return 1.6276 / std::sqrt(n); }

}  // namespace longrun
