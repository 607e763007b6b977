#include "longrun/apps.hpp"
#include "longrun/cond_approx.hpp"
#include "longrun/errors.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/sampler.hpp"
#include "longrun/special.hpp"

#include <doctest.h>

#include <cmath>

using namespace longrun;

namespace {

// KS distance of modulated draws from the normalized target density.
double modulated_ks(const Model& model, double alpha, double beta, double center, Envelope env, int N) {
    RngStream r(21, static_cast<std::uint64_t>(env));
    std::vector<double> xs;
    for (int i = 0; i < N; ++i) xs.push_back(sample_modulated(model, alpha, beta, center, r, env).value);
    const double log_C = normalizing_constant(model, alpha, beta, center).log_C;
    auto f = [&](double x) {
        const double lp = model.base_logpdf(x);
        return lp == -kInf ? 0.0 : std::exp(log_C + lp + norm_logpdf(model.u(x), alpha * beta + center, beta));
    };
    const double lo = model.x_support().lo;
    return ks_statistic(xs, [&](double x) { return quad::integrate(f, lo, x).value; });
}

}  // namespace

TEST_CASE("modulated draws follow the target for every envelope") {
    CenteredExponentialModel expo;
    const int N = 3000;
    for (Envelope env : {Envelope::Uniform, Envelope::Base, Envelope::Tilted, Envelope::Auto}) {
        CHECK(modulated_ks(expo, 0.3, 2.0, 0.2, env, N) < ks_critical_1pct(N));
    }
    NormalSquareModel square;
    CHECK(modulated_ks(square, 0.1, 5.0, 1.2, Envelope::Base, N) < ks_critical_1pct(N));
}

TEST_CASE("sampled paths re-score bit for bit and replay under the same seed") {
    GammaModel gamma(2.0, 1.0);
    const auto e = ConditioningEvent::point_sum(2.5, 40);
    RngStream r1(3, 9), r2(3, 9);
    const auto p1 = sample_path(gamma, e, 20, r1);
    const auto p2 = sample_path(gamma, e, 20, r2);
    CHECK(p1.values == p2.values);
    CHECK(p1.log_g == eval_log_g(gamma, e, p1.values).log_g);
    CHECK(p1.stream == 9);
}

TEST_CASE("tilted law sampler") {
    NormalSquareModel square;
    RngStream r(4, 0);
    double s = 0;
    const int N = 40000;
    for (int i = 0; i < N; ++i) s += square.u(sample_tilted_law(square, 0.2, r));
    CHECK(s / N == doctest::Approx(square.cgf_d1(0.2)).epsilon(0.02));
}

TEST_CASE("overshoot draws") {
    RngStream r(8, 0);
    double s = 0;
    const int N = 50000;
    for (int i = 0; i < N; ++i) s += sample_overshoot(0.3, 20.0, std::nullopt, r) - 0.3;
    CHECK(s / N == doctest::Approx(0.05).epsilon(0.02));
    for (int i = 0; i < 1000; ++i) {
        const double v = sample_overshoot(0.3, 20.0, 0.01, r);
        CHECK((v > 0.3 && v < 0.31));
    }
}

TEST_CASE("large-set paths carry the randomized level") {
    CenteredExponentialModel expo;
    const auto e = ConditioningEvent::exceedance(0.25, 100);
    RngStream r(2, 0);
    const auto ps = sample_large_set_path(expo, e, 30, r);
    REQUIRE(ps.randomized_level);
    CHECK(*ps.randomized_level > 0.25);
    CHECK(ps.values.size() == 30);
    CHECK_THROWS_AS(sample_path(expo, e, 30, r), DomainError);
}

TEST_CASE("inverse-normal rejection detects a bad envelope") {
    RngStream r(1, 0);
    auto log_p = [](double) { return 0.0; };
    auto sample_f = [](RngStream& g) { return g.uniform(); };
    auto log_f = [](double) { return 0.0; };
    CHECK_THROWS_AS(inverse_normal_rejection(log_p, 0.0, 1.0, sample_f, log_f, std::log(0.5), r), EnvelopeViolation);
    const Draw d = inverse_normal_rejection(log_p, 2.0, 4.0, sample_f, log_f, 0.0, r);
    CHECK(d.proposals == 1);
}
