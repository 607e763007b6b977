#include "longrun/errors.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/run_length.hpp"
#include "longrun/special.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace longrun;

TEST_CASE("saddlepoint density of the mean") {
    StandardNormalModel normal;
    CenteredExponentialModel expo;
    GammaModel gamma(2.0, 1.0);
    for (double u : {-1.0, 0.0, 0.4, 2.0}) {
        CHECK(saddlepoint_mean_logpdf(normal, 30, u) == doctest::Approx(norm_logpdf(u, 0.0, 1.0 / 30)).epsilon(1e-13));
    }
    CHECK(saddlepoint_mean_logpdf(expo, 40, 0.0) ==
          doctest::Approx(0.5 * std::log(40.0) - kLogSqrt2Pi).epsilon(1e-12));
    const double sp = saddlepoint_mean_logpdf(expo, 5, 0.4);
    const double grid = oracle::mean_density_by_convolution(expo, 5, 0.4).log_value;
    CHECK(std::abs(std::expm1(sp - grid)) <= 0.05);
    const Model* models[] = {&expo, &gamma};
    for (const Model* m : models) {
        const double mass = quad::integrate([&](double u) { return std::exp(saddlepoint_mean_logpdf(*m, 20, u)); },
                                            m->u_support().lo, m->u_support().hi, {1e-8, 1e-8, 4000})
                                .value;
        CHECK((mass >= 0.9 && mass <= 1.1));
    }
}

TEST_CASE("log tilt ratio") {
    CenteredExponentialModel expo;
    StandardNormalModel normal;
    CHECK(log_tilt_ratio(expo, 10, 0.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(log_tilt_ratio(normal, 50, 0.3) == doctest::Approx(50 * 0.045).epsilon(1e-13));
    CHECK(log_tilt_ratio(expo, 100, 0.3) == doctest::Approx(100 * (0.3 - std::log(1.3))).epsilon(1e-10));
    for (double m = -0.5; m < 2.0; m += 0.25) {
        CHECK(std::abs(log_tilt_ratio(expo, 37, m) - 37 * rate(expo, m)) <= 1e-10 * std::max(1.0, 37 * rate(expo, m)));
    }
}

TEST_CASE("A/B estimators") {
    CenteredExponentialModel expo;
    const double a = oracle::exponential_level_for_probability(100, 1e-8);
    const auto e = ConditioningEvent::point_sum(a, 100);
    const ABEstimate zero = estimate_AB(expo, e, 0, 10, 1);
    CHECK(zero.A_hat == 1.0);
    CHECK(zero.B_hat == 1.0);
    const ABEstimate one = estimate_AB(expo, e, 10, 1, 77);
    const ABEstimate again = estimate_AB(expo, e, 10, 1, 77);
    CHECK(one.A_hat == again.A_hat);
    CHECK(one.B_hat == again.B_hat);
    for (int k : {5, 20, 40}) {
        for (ABSampling s : {ABSampling::Base, ABSampling::Proposal}) {
            ABOptions o;
            o.sampling = s;
            const ABEstimate est = estimate_AB(expo, e, k, 2000, 3, o);
            CHECK(est.A_hat >= est.B_hat * est.B_hat - 3 * est.stderr_A);
        }
    }
    ABOptions par;
    par.workers = 3;
    const ABEstimate p3 = estimate_AB(expo, e, 20, 500, 4, par);
    const ABEstimate p1 = estimate_AB(expo, e, 20, 500, 4);
    CHECK(p3.A_hat == p1.A_hat);
    CHECK(p3.B_hat == p1.B_hat);
}

TEST_CASE("k rows and k selection") {
    ABEstimate est;
    est.A_hat = 0.5;
    est.B_hat = 0.6;
    const KRow row = make_k_row(3, est);
    CHECK(row.VRE_raw == doctest::Approx(0.14));
    CHECK(row.CI_lo == row.ERE_bar - 2 * std::sqrt(row.VRE_bar));
    CHECK(row.CI_hi == row.ERE_bar + 2 * std::sqrt(row.VRE_bar));
    est.A_hat = 0.3;
    CHECK(make_k_row(3, est).VRE_bar == 0.0);
    CHECK(default_k_grid(100) == std::vector<int>{1, 2, 4, 8, 16, 32, 64, 99});

    CenteredExponentialModel expo;
    const double a = oracle::exponential_level_for_probability(100, 1e-8);
    const auto e = ConditioningEvent::point_sum(a, 100);
    const KRow first = make_k_row(80, estimate_AB(expo, e, 80, 500, 1));
    REQUIRE(first.CI_hi > 0.0);
    const double inside = std::max(0.5 * (first.CI_lo + first.CI_hi), 0.5 * first.CI_hi);
    const KReport rep = select_k(expo, e, inside, 500, {80, 90, 95}, 1);
    CHECK(rep.k_delta == 80);
    CHECK(rep.rows.size() == 1);
    try {
        select_k(expo, e, 1e6, 200, {10, 20}, 1);
        FAIL("expected NotReached");
    } catch (const NotReached& nr) {
        CHECK(nr.report.rows.size() == 2);
        CHECK_FALSE(nr.report.k_delta);
    }
    SelectOptions full;
    full.full_table = true;
    CHECK(select_k(expo, e, inside, 500, {80, 90, 95}, 1, full).rows.size() == 3);
    SelectOptions step;
    step.k_step = 30;
    step.full_table = true;
    KReport lin;
    try {
        lin = select_k(expo, e, inside, 200, {}, 1, step);
    } catch (const NotReached& nr) {
        lin = nr.report;
    }
    CHECK(lin.rows.front().k == 30);
    CHECK(lin.rows.back().k == 90);
}
