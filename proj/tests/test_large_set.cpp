#include "longrun/errors.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/sampler.hpp"
#include "longrun/special.hpp"

#include <doctest.h>

#include <cmath>

using namespace longrun;

TEST_CASE("rate function") {
    StandardNormalModel normal;
    CenteredExponentialModel expo;
    CHECK(rate(expo, 0.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(rate(normal, 0.7) == doctest::Approx(0.245).epsilon(1e-12));
    CHECK(rate(expo, 0.5) == doctest::Approx(0.5 - std::log(1.5)).epsilon(1e-10));
    for (double t : interior_tilt_grid(expo, 15)) {
        const double m = expo.cgf_d1(t);
        CHECK(rate(expo, m) == doctest::Approx(t * m - expo.cgf(t)).epsilon(1e-10));
    }
    for (double x = -0.8; x < 2.0; x += 0.2) {
        CHECK(rate(expo, x) >= 0.0);
        CHECK(rate(expo, x) <= 0.5 * (rate(expo, x - 0.1) + rate(expo, x + 0.1)) + 1e-14);
    }
}

TEST_CASE("tail probability") {
    StandardNormalModel normal;
    CenteredExponentialModel expo;
    CHECK(std::abs(log_tail_prob(normal, 400, 0.3) - oracle::normal_tail_exact(400, 0.3)) < 0.05);
    const double a = 0.3;
    const double ratio = (oracle::gamma_tail_exact(2000, a) - oracle::gamma_tail_exact(4000, a)) / 2000.0 / rate(expo, a);
    CHECK(std::abs(ratio - 1.0) < 0.02);
    for (double P : {1e-4, 1e-8}) {
        const double b = oracle::exponential_level_for_probability(100, P);
        CHECK(std::abs(log_tail_prob(expo, 100, b) - std::log(P)) < 0.1);
    }
    double prev = kInf;
    for (double x = 0.05; x < 1.0; x += 0.05) {
        const double v = log_tail_prob(expo, 50, x);
        CHECK(v < prev);
        CHECK(log_tail_prob(expo, 60, x) < v);
        prev = v;
    }
    CHECK_THROWS_AS(log_tail_prob(expo, 10, -0.1), RangeError);
}

TEST_CASE("set density and set probabilities") {
    CHECK(set_density_M(SetDescriptor::half_line(0.2), 3.0) == 1.0);
    CHECK(set_density_M(SetDescriptor::interval(1.0, 2.0), 1.0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(set_density_M(SetDescriptor::interval(1.0, 1e6), 1.0) == doctest::Approx(1.0));
    for (double t : {0.01, 1.0, 50.0}) {
        const double M = set_density_M(SetDescriptor::interval(0.0, 0.3), t);
        CHECK((M >= 0.0 && M <= 1.0));
    }
    CenteredExponentialModel expo;
    for (double a : {0.1, 0.3, 0.6}) {
        CHECK(log_set_prob(expo, 100, SetDescriptor::half_line(a)) == doctest::Approx(log_tail_prob(expo, 100, a)).epsilon(1e-12));
        CHECK(log_set_prob(expo, 100, SetDescriptor::interval(a, a + 0.05)) < log_tail_prob(expo, 100, a));
        CHECK(std::isfinite(log_set_prob(expo, 100, SetDescriptor::interval(a, a + 0.05), SetProbForm::Saddle)));
    }
}

TEST_CASE("overshoot law") {
    CenteredExponentialModel expo;
    const int n = 100;
    const double a = 0.25;
    const double lam = n * solve_tilt(expo, a);
    auto f = [&](double v) { return std::exp(overshoot_logpdf(expo, n, a, v)); };
    CHECK(quad::integrate(f, a, kInf).value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(quad::integrate([&](double v) { return v * f(v); }, a, kInf).value ==
          doctest::Approx(a + 1 / lam).epsilon(1e-10));
    const double c = 0.1;
    const double v = a + 0.03;
    CHECK(overshoot_logpdf(expo, n, a, v, c) - overshoot_logpdf(expo, n, a, v) ==
          doctest::Approx(-log1mexp(lam * c)).epsilon(1e-12));
    CHECK_THROWS_AS(overshoot_logpdf(expo, n, a, a - 0.01), DomainError);
    CHECK_THROWS_AS(overshoot_logpdf(expo, n, a, a + 0.2, c), DomainError);
    CHECK(default_truncation_width(expo, n, a) * lam == doctest::Approx(20.0));
}

TEST_CASE("advisory conditions") {
    CHECK(check_condition_C(100, 50, 0.2).ok);
    CHECK_FALSE(check_condition_C(100, 99, 0.5).ok);
    CHECK_FALSE(check_condition_C(100, 10, 0.01).ok);
    CenteredExponentialModel expo;
    StandardNormalModel normal;
    CHECK(check_condition_V(expo, 0.3).ok);
    CHECK(check_condition_V(normal, 0.3).ok);
}

TEST_CASE("mixture density g_nA") {
    CenteredExponentialModel expo;
    const int n = 100;
    const double a = 0.25;
    RngStream r(12, 0);
    const auto base = ConditioningEvent::exceedance(a, n);
    for (int l = 0; l < 5; ++l) {
        const auto ps = sample_large_set_path(expo, base, 40, r);
        const double g32 = eval_log_g_nA(expo, base, ps.values, {32});
        const double g64 = eval_log_g_nA(expo, base, ps.values, {64});
        CHECK(std::abs(std::expm1(g32 - g64)) < 1e-6);
    }
    const std::vector<double> y{0.4, -0.2, 0.9};
    const auto thin = ConditioningEvent::exceedance(a, n, 1e-6 / n);
    CHECK(std::abs(std::expm1(eval_log_g_nA(expo, thin, y) -
                              eval_log_g(expo, ConditioningEvent::point_sum(a, n), y).log_g)) < 1e-4);
    const auto small = ConditioningEvent::exceedance(a, 50);
    const double mass = quad::integrate(
                            [&](double x) {
                                const std::vector<double> p{x};
                                return std::exp(eval_log_g_nA(expo, small, p));
                            },
                            -1.0, kInf, {1e-10, 1e-8, 2000})
                            .value;
    CHECK(std::abs(mass - 1.0) < 1e-4);
}

TEST_CASE("mixture density integrates to one against the exact exceedance law") {
    CenteredExponentialModel expo;
    const int n = 8, k = 3;
    const double a = 0.5;
    const auto e = ConditioningEvent::exceedance(a, n);
    const double logP = oracle::gamma_tail_exact(n, a);
    RngStream r(13, 0);
    const int N = 20000;
    std::vector<double> ratios;
    for (int l = 0; l < N; ++l) {
        const auto x = oracle::sample_exponential_exceedance(a, n, r);
        const std::vector<double> y(x.begin(), x.begin() + k);
        double w = 0;
        for (double v : y) w += v + 1;
        const double rest = std::max(0.0, n * (1 + a) - w);
        // Prefix marginal of the exceedance law: p(y) Q(n - k, rest) / P.
        const double log_p = -w + (rest > 0 ? oracle::log_gamma_q(n - k, rest) : 0.0) - logP;
        ratios.push_back(std::exp(eval_log_g_nA(expo, e, y) - log_p));
    }
    const double mean = pairwise_sum(ratios) / N;
    double ss = 0;
    for (double v : ratios) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (N - 1) / N);
    CHECK(std::abs(mean - 1.0) < 3 * se);
}
