#pragma once

#include "longrun/model.hpp"
#include "longrun/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

/// Exact and brute-force references. Nothing here depends on the approximating
/// density or its sampler.
namespace longrun::oracle {

struct OracleResult {
    double log_value = 0.0;
    std::string method;  // closed_form | grid_convolution | rejection
    double error_estimate = 0.0;
    double grid_spacing = 0.0;
};

/// log density of (X_1..X_k) given X_1 + ... + X_n = n a for i.i.d. N(0, 1).
double gaussian_conditional_logpdf(double a, int n, std::span<const double> path);

/// Exact draw of (X_1..X_k) given the sum, for i.i.d. N(0, 1).
std::vector<double> sample_gaussian_conditional(double a, int n, int k, RngStream& rng);

/// log density of (X_1..X_k) given the sum n a for i.i.d. centered unit
/// exponentials. Throws SupportError outside the support.
double exponential_conditional_logpdf(double a, int n, std::span<const double> path);

/// Exact draw of (X_1..X_k) given the sum n a (uniform spacings / Dirichlet).
std::vector<double> sample_exponential_conditional(double a, int n, int k, RngStream& rng);

struct GridSpec {
    /// Cell width; 0 picks (hi - lo) / 2048.
    double h = 0.0;
    /// Range for X; defaults to the support clipped at 15 standard deviations.
    std::optional<double> lo, hi;
    /// Allowed relative change under grid halving.
    double tol = 1e-4;
    int max_cells = 1 << 14;
};

/// log density at `total` of the sum of `count` i.i.d. copies of X under the
/// tilted law at `tilt`, by direct convolution of cell masses on a lattice that
/// contains `total`. Identity u only.
OracleResult sum_density_by_convolution(const Model& model, int count, double total, double tilt = 0.0,
                                        const GridSpec& grid = {});

/// log density at u of the mean of n i.i.d. copies of X. n = 1 is closed form.
OracleResult mean_density_by_convolution(const Model& model, int n, double u, const GridSpec& grid = {});

/// log density of (x_1..x_k) given the sum of n terms equals u_sum, from grid
/// convolutions of the law tilted at `tilt`; the result does not depend on the tilt.
double conditional_logpdf_by_convolution(const Model& model, int n, double u_sum, std::span<const double> path,
                                         double tilt = 0.0, const GridSpec& grid = {});

/// log Q(s, x), the regularized upper incomplete gamma function.
double log_gamma_q(double s, double x);

/// log P(S_n > n a) for n centered unit exponentials: log Q(n, n (1 + a)).
double gamma_tail_exact(int n, double a);

/// log P(S_n > n a) for n standard normals.
double normal_tail_exact(int n, double a);

/// The level a > 0 with gamma_tail_exact(n, a) = log(probability).
double exponential_level_for_probability(int n, double probability);

/// The level a with normal_tail_exact(n, a) = log(probability).
double normal_level_for_probability(int n, double probability);

/// Means U_{1,n}/n of i.i.d. base samples, kept when U_{1,n} > n a, until `count`
/// are collected. Throws RangeError after max_draws sums.
std::vector<double> rejection_exceedance_means(const Model& model, int n, double a, int count, RngStream& rng,
                                               long max_draws = 100'000'000);

/// Exact draw of (X_1..X_n) given S_n > n a for centered unit exponentials.
std::vector<double> sample_exponential_exceedance(double a, int n, RngStream& rng);

/// log density of the exact law of (X_1..X_n) given S_n > n a for centered unit exponentials.
double exponential_exceedance_logpdf(double a, int n, std::span<const double> x);

}  // namespace longrun::oracle
