#include "longrun/apps.hpp"
#include "longrun/errors.hpp"
#include "longrun/oracles.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/special.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace longrun;
using namespace longrun::oracle;

TEST_CASE("Gaussian conditional oracle") {
    const std::vector<double> y{0.7};
    CHECK(gaussian_conditional_logpdf(0.7, 2, y) == doctest::Approx(-0.5 * std::log(std::numbers::pi)));
    const int n = 7;
    const std::vector<double> flat(4, 0.2);
    double expected = 0;
    for (int i = 0; i < 4; ++i) expected += norm_logpdf(0.0, 0.0, (n - i - 1.0) / (n - i));
    CHECK(gaussian_conditional_logpdf(0.2, n, flat) == doctest::Approx(expected).epsilon(1e-13));
    StandardNormalModel normal;
    const std::vector<double> path{0.3, -0.4};
    CHECK(conditional_logpdf_by_convolution(normal, 4, 4 * 0.1, path) ==
          doctest::Approx(gaussian_conditional_logpdf(0.1, 4, path)).epsilon(1e-6));
}

TEST_CASE("exponential conditional oracle") {
    const double a = 0.3;
    const double T = 2 * (1 + a);
    for (double y : {-0.9, 0.0, 1.2}) {
        const std::vector<double> p{y};
        CHECK(exponential_conditional_logpdf(a, 2, p) == doctest::Approx(-std::log(T)));
    }
    const std::vector<double> bad{3.0};
    CHECK_THROWS_AS(exponential_conditional_logpdf(a, 2, bad), SupportError);
    // Mass over the simplex at n = 4, k = 2.
    const double T4 = 4 * (1 + a);
    const double mass = quad::integrate(
                            [&](double w1) {
                                return quad::integrate(
                                           [&](double w2) {
                                               const std::vector<double> p{w1 - 1, w2 - 1};
                                               return std::exp(exponential_conditional_logpdf(a, 4, p));
                                           },
                                           0.0, T4 - w1, {1e-12, 1e-11, 2000})
                                    .value;
                            },
                            0.0, T4, {1e-12, 1e-10, 2000})
                            .value;
    CHECK(std::abs(mass - 1.0) < 1e-6);
}

TEST_CASE("exponential conditional oracle against a rejection sample") {
    CenteredExponentialModel expo;
    const int n = 6;
    const double a = 0.2;
    const double t = solve_tilt(expo, a);
    const double h = 0.01 * std::sqrt(expo.cgf_d2(t)) / std::sqrt(static_cast<double>(n));
    RngStream r(6, 0);
    std::vector<double> kept;
    while (kept.size() < 4000) {
        double s = 0, y1 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = expo.sample_base(r);
            if (i == 0) y1 = x;
            s += x;
        }
        if (std::abs(s - n * a) < h) kept.push_back(y1);
    }
    const double T = n * (1 + a);
    // Y1 + 1 = T * Beta(1, n - 1).
    auto cdf = [&](double y) { return 1.0 - std::pow(std::max(0.0, 1.0 - (y + 1) / T), n - 1); };
    CHECK(ks_statistic(kept, cdf) < ks_critical_1pct(static_cast<double>(kept.size())));
    RngStream s(6, 1);
    std::vector<double> exact;
    for (int i = 0; i < 4000; ++i) exact.push_back(sample_exponential_conditional(a, n, 1, s)[0]);
    CHECK(ks_statistic(exact, cdf) < ks_critical_1pct(4000));
}

TEST_CASE("conditional density does not depend on the tilt") {
    CenteredExponentialModel expo;
    for (int n : {3, 4, 5, 6}) {
        const double a = 0.25;
        const std::vector<double> path{0.1, -0.3};
        const double plain = conditional_logpdf_by_convolution(expo, n, n * a, path, 0.0);
        const double tilted = conditional_logpdf_by_convolution(expo, n, n * a, path, solve_tilt(expo, a));
        CHECK(plain == doctest::Approx(tilted).epsilon(1e-6));
        CHECK(tilted == doctest::Approx(exponential_conditional_logpdf(a, n, path)).epsilon(1e-4));
    }
}

TEST_CASE("mean density by convolution") {
    CenteredExponentialModel expo;
    StandardNormalModel normal;
    CHECK(mean_density_by_convolution(expo, 1, 0.4).log_value == doctest::Approx(-1.4).epsilon(1e-14));
    const auto two = mean_density_by_convolution(normal, 2, 0.3);
    CHECK(std::abs(std::exp(two.log_value) - std::exp(norm_logpdf(0.3, 0.0, 0.5))) < 1e-6);
    CHECK(two.method == "grid_convolution");
    CHECK(two.grid_spacing > 0.0);
    const auto five = mean_density_by_convolution(expo, 5, 0.4);
    CHECK(five.error_estimate <= 1e-4);
    GridSpec coarse;
    coarse.h = 0.5;
    coarse.tol = 1e-12;
    CHECK_THROWS_AS(mean_density_by_convolution(expo, 5, 0.4, coarse), GridTooCoarse);
}

TEST_CASE("Gamma tail oracle") {
    CHECK(gamma_tail_exact(1, 1.0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(gamma_tail_exact(1, 1e-12) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(log_gamma_q(3.0, 2.0) == doctest::Approx(std::log(std::exp(-2.0) * (1 + 2 + 2))).epsilon(1e-12));
    CHECK(log_gamma_q(50.0, 80.0) ==
          doctest::Approx(std::log(0.00013078397659141)).epsilon(1e-12));
    const double a = exponential_level_for_probability(100, 1e-2);
    CHECK(gamma_tail_exact(100, a) == doctest::Approx(std::log(1e-2)).epsilon(1e-10));
    const double b = normal_level_for_probability(100, 1e-8);
    CHECK(normal_tail_exact(100, b) == doctest::Approx(std::log(1e-8)).epsilon(1e-10));
}

TEST_CASE("exact exceedance sampler and density") {
    const double a = 0.2;
    const int n = 5;
    RngStream r(9, 0);
    const double logP = gamma_tail_exact(n, a);
    for (int i = 0; i < 200; ++i) {
        const auto x = sample_exponential_exceedance(a, n, r);
        double s = 0, lp = 0;
        for (double v : x) {
            s += v;
            lp -= v + 1;
        }
        CHECK(s > n * a);
        CHECK(exponential_exceedance_logpdf(a, n, x) == doctest::Approx(lp - logP).epsilon(1e-12));
    }
    CenteredExponentialModel expo;
    RngStream g(9, 1);
    const auto means = rejection_exceedance_means(expo, n, a, 500, g);
    for (double m : means) CHECK(m > a);
}
