#include "longrun/special.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace longrun {

double log_std_norm_cdf(double z) {
    if (z > -30.0) return std::log(std_norm_cdf(z));
    // Mills-ratio asymptotic series; the truncation error is below 1e-14 here.
    const double z2 = z * z;
    const double inv = 1.0 / z2;
    const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
    return std_norm_logpdf(z) - std::log(-z) + std::log(series);
}

double std_norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_norm_quantile: p outside (0,1)");
    // Acklam's rational approximation, then two Halley steps against erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        // Work with the smaller tail to keep relative accuracy.
        const double e = (x < 0.0) ? std_norm_cdf(x) - p : (1.0 - p) - std_norm_cdf(-x);
        const double u = e * std::exp(-std_norm_logpdf(x));
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double log_sum_exp(std::span<const double> values) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : values) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : values) s += std::exp(v - mx);
    return mx + std::log(s);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace longrun
