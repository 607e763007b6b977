#pragma once

#include "longrun/cond_approx.hpp"
#include "longrun/large_set.hpp"
#include "longrun/model.hpp"
#include "longrun/sampler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace longrun {

struct WeightStats {
    double mean = 0.0;
    double cv = 0.0;
    double max = 0.0;
};

struct ISReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    int L = 0;
    int k = 0;
    double hit_rate = 0.0;
    WeightStats importance_factor_stats;
    int aborted = 0;
    std::optional<double> mse_vs_iid_ratio;
    /// Width of the overshoot truncation used for both sampling and scoring.
    double c = 0.0;
    /// Per-replicate weight times indicator, kept for MSE comparisons.
    std::vector<double> terms;
};

struct ISOptions {
    ApproxOptions approx;
    SamplerOptions sampler;
    /// Gauss-Legendre nodes of the overshoot mixture.
    int quad_points = 64;
    /// Overshoot truncation width; 20 / (n m^{-1}(a)) when unset.
    std::optional<double> c;
    /// Treat k = 1 as the classical scheme whose first factor is the tilted law at a.
    bool classical_k1 = false;
    int workers = 1;
    bool keep_terms = false;
};

/// Importance-sampling estimate of P(U_{1,n} > n a). Replicate l uses
/// RngStream(seed, l). The first k coordinates come from the overshoot mixture
/// g_nA and the rest are i.i.d. from the tilted law at a; k = 0 is the classical
/// i.i.d. tilted scheme. Aborted replicates enter with weight 0 and are counted.
ISReport is_estimate(const Model& model, double a, int n, int k, int L, std::uint64_t seed,
                     const ISOptions& options = {});

struct MSEPoint {
    int k = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double mse = 0.0;
    double ratio = 0.0;
    double reference = 0.0;
    double hit_rate = 0.0;
    int aborted = 0;
};

/// Per-sample squared error against the exact probability for every k, divided
/// by the same quantity at k = 0. All k share the replicate streams.
std::vector<MSEPoint> mse_ratio_curve(const Model& model, double a, int n, const std::vector<int>& ks, int L,
                                      std::uint64_t seed, double exact_probability, const ISOptions& options = {});

struct RBOptions {
    ApproxOptions approx;
    SamplerOptions sampler;
    /// Run lengths of the preliminary estimator theta_k that are Rao-Blackwellized.
    std::vector<int> rb_ks{2};
    int workers = 1;
};

struct RBReport {
    std::vector<int> k_grid;
    std::vector<double> var_initial_by_k;
    std::vector<double> var_initial_stderr;
    /// Variance of theta_RB,2 (the first entry of rb_ks).
    double var_rb = 0.0;
    double var_rb_stderr = 0.0;
    std::vector<int> rb_ks;
    std::vector<double> var_rb_by_k;
    std::vector<double> var_rb_stderr_by_k;
    /// var_rb minus the inner Monte Carlo contribution, mean within-variance / L_inner.
    std::vector<double> var_rb_corrected_by_k;
    double cr_bound = 0.0;
    int n = 0;
    int L_outer = 0;
    int L_inner = 0;
};

/// Rao-Blackwellization of theta_k = sum_{i<=k} X_i / (k rho) in Gamma(rho, theta_T):
/// for each outer sample the conditional mean given U_{1,n} is estimated from
/// L_inner draws of g_{U_{1,n}}. Outer replicate l uses RngStream(seed, l).
RBReport rao_blackwell_gamma(double rho, double theta_T, int n, const std::vector<int>& k_grid, int L_outer,
                             int L_inner, std::uint64_t seed, const RBOptions& options = {});

struct TiltedHistogram {
    std::vector<double> edges;
    std::vector<long> counts;
    std::vector<double> density;
    /// Tilted density at the bin centers.
    std::vector<double> reference;
    double ks = 0.0;
    double ks_critical_1pct = 0.0;
    long count = 0;
};

/// Histogram of `values` against the tilted law at t, with the Kolmogorov-Smirnov
/// distance to its distribution function (tabulated by Gauss-Legendre cells).
TiltedHistogram histogram_vs_tilted(const Model& model, double t, std::vector<double> values, int bins);

/// Kolmogorov-Smirnov distance between a sample and a continuous distribution function.
double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf);

}  // namespace longrun
