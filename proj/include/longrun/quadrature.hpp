#pragma once

#include <functional>
#include <span>
#include <vector>

namespace longrun::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-8;
    int max_intervals = 2000;
};

/// Adaptive Gauss-Kronrod (7/15) integration on [lo, hi]. Either end may be
/// infinite; infinite ranges are mapped onto finite ones. Throws
/// IntegrationFailure if the tolerance is not met within max_intervals.
Result integrate(const std::function<double(double)>& f, double lo, double hi, Tolerance tol = {});

/// Integrates over (lo, hi) split at the given interior breakpoints (out-of-range
/// breakpoints are dropped). Errors are summed across panels.
Result integrate_panels(const std::function<double(double)>& f, double lo, double hi,
                        std::span<const double> breakpoints, Tolerance tol = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int points);

}  // namespace longrun::quad
