#include "longrun/apps.hpp"
#include "longrun/cond_approx.hpp"
#include "longrun/large_set.hpp"
#include "longrun/oracles.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/run_length.hpp"
#include "longrun/sampler.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

using namespace longrun;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

void report(int id, const char* name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %2d %-28s %s  %s\n", id, name, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void gaussian_exactness() {
    Timer timer;
    StandardNormalModel normal;
    ApproxOptions opts;
    opts.shift = CenterShift::AdaptiveMi;
    const int n = 50, k = 49;
    const double a = 0.3;
    const auto e = ConditioningEvent::point_sum(a, n);
    double worst = 0.0;
    for (int l = 0; l < 100; ++l) {
        RngStream r(1, l);
        const auto y = oracle::sample_gaussian_conditional(a, n, k, r);
        const double lg = eval_log_g(normal, e, y, opts).log_g;
        worst = std::max(worst, std::abs(std::expm1(lg - oracle::gaussian_conditional_logpdf(a, n, y))));
    }
    const double t = timer.seconds();
    report(1, "gaussian exactness", worst <= 1e-8 && t < 1.0, fmt("max rel err %.3g, %.2f s", worst, t));
}

void exponential_relative_error() {
    Timer timer;
    CenteredExponentialModel expo;
    const int n = 1000, k = 800;
    const double a = oracle::exponential_level_for_probability(n, 1e-2);
    const auto e = ConditioningEvent::point_sum(a, n);
    std::vector<double> rel;
    for (int l = 0; l < 200; ++l) {
        RngStream r(2, l);
        const auto y = oracle::sample_exponential_conditional(a, n, k, r);
        const double lg = eval_log_g(expo, e, y).log_g;
        rel.push_back(std::abs(std::expm1(lg - oracle::exponential_conditional_logpdf(a, n, y))));
    }
    const double frac = std::count_if(rel.begin(), rel.end(), [](double v) { return v < 1.0; }) / 200.0;
    std::nth_element(rel.begin(), rel.begin() + 100, rel.end());
    const double t = timer.seconds();
    report(2, "exponential relative error", frac >= 0.95 && t < 120.0,
           fmt("fraction < 1: %.3f, median %.3f, %.1f s", frac, rel[100], t));
}

void saddlepoint_density() {
    Timer timer;
    CenteredExponentialModel expo;
    double worst = 0.0;
    std::string detail;
    for (double u : {0.2, 0.4, 0.8}) {
        const double exact = oracle::mean_density_by_convolution(expo, 5, u).log_value;
        const double err = std::abs(std::expm1(saddlepoint_mean_logpdf(expo, 5, u) - exact));
        worst = std::max(worst, err);
        detail += fmt("u=%.1f %.4f ", u, err);
    }
    const double t = timer.seconds();
    report(3, "saddlepoint density", worst <= 0.05 && t < 10.0, detail + fmt("%.2f s", t));
}

void tail_probability() {
    CenteredExponentialModel expo;
    double worst = 0.0, ok_below = 0.0;
    int bad = 0, total = 0;
    for (double lp = -2.0; lp >= -8.0 - 1e-9; lp -= 0.25) {
        const double a = oracle::exponential_level_for_probability(100, std::pow(10.0, lp));
        const double err = std::abs(log_tail_prob(expo, 100, a) - oracle::gamma_tail_exact(100, a));
        worst = std::max(worst, err);
        ++total;
        if (err > 0.1) {
            ++bad;
            ok_below = lp - 0.25;
        }
    }
    report(4, "tail probability", bad == 0,
           fmt("max |log err| %.3f over %d levels, %d above 0.1 (within 0.1 only for P <= 1e%.2f)", worst, total, bad,
               ok_below));
}

void k_selection() {
    Timer timer;
    CenteredExponentialModel expo;
    const int n = 100, L = 10000;
    const double a = oracle::exponential_level_for_probability(n, 1e-8);
    const auto e = ConditioningEvent::point_sum(a, n);
    ABOptions approx;
    ABOptions exact;
    exact.oracle_logp = [a, n](std::span<const double> y) {
        try {
            return oracle::exponential_conditional_logpdf(a, n, y);
        } catch (const SupportError&) {
            return -kInf;
        }
    };
    int pass = 0, total = 0;
    std::string misses;
    for (int k = 5; k < n; k += 5) {
        const KRow A = make_k_row(k, estimate_AB(expo, e, k, L, 5, approx));
        const KRow O = make_k_row(k, estimate_AB(expo, e, k, L, 5, exact));
        const bool ok = O.CI_lo <= A.ERE_bar && A.ERE_bar <= O.CI_hi && A.CI_lo <= O.ERE_bar && O.ERE_bar <= A.CI_hi;
        pass += ok;
        ++total;
        if (!ok) misses += fmt(" %d", k);
    }
    const double frac = static_cast<double>(pass) / total;
    const double t = timer.seconds();
    report(5, "k-selection bands", frac >= 0.9 && t < 300.0,
           fmt("%d/%d grid points agree (%.3f), misses:%s, %.1f s", pass, total, frac, misses.c_str(), t));
}

void histogram_match() {
    CenteredExponentialModel expo;
    StandardNormalModel normal;
    bool all = true;
    std::string detail;
    for (double P : {1e-2, 1e-8}) {
        struct Case {
            const Model* model;
            double a;
            int k;
            const char* tag;
        };
        const Case cases[] = {{&expo, oracle::exponential_level_for_probability(1000, P), 800, "exp"},
                              {&normal, oracle::normal_level_for_probability(1000, P), 999, "normal"}};
        for (const Case& c : cases) {
            Timer timer;
            std::vector<double> pooled;
            const auto e = ConditioningEvent::point_sum(c.a, 1000);
            for (int p = 0; p < 10; ++p) {
                RngStream r(6, p);
                const PathSample ps = sample_path(*c.model, e, c.k, r);
                pooled.insert(pooled.end(), ps.values.begin(), ps.values.end());
            }
            const TiltedHistogram h = histogram_vs_tilted(*c.model, solve_tilt(*c.model, c.a), pooled, 60);
            const double t = timer.seconds();
            const bool ok = h.ks < h.ks_critical_1pct && t < 120.0;
            all = all && ok;
            detail += fmt("%s P=%g KS %.4f/%.4f; ", c.tag, P, h.ks, h.ks_critical_1pct);
        }
    }
    report(6, "histogram vs tilted law", all, detail + "10 pooled paths");
}

void overshoot_law() {
    CenteredExponentialModel expo;
    const int n = 100;
    const double a = oracle::exponential_level_for_probability(n, 1e-2);
    RngStream r(7, 0);
    const auto means = oracle::rejection_exceedance_means(expo, n, a, 10000, r);
    const double lambda = n * solve_tilt(expo, a);
    std::vector<double> over;
    double sum = 0.0;
    for (double m : means) {
        over.push_back(m - a);
        sum += m - a;
    }
    const double ks = ks_statistic(over, [lambda](double x) { return x <= 0 ? 0.0 : -std::expm1(-lambda * x); });
    const double crit = ks_critical_1pct(over.size());
    report(7, "overshoot law", ks < crit,
           fmt("KS %.4f vs %.4f, mean overshoot %.5f vs 1/rate %.5f", ks, crit, sum / over.size(), 1.0 / lambda));
}

void is_variance_reduction() {
    Timer timer;
    CenteredExponentialModel expo;
    const int n = 100, L = 2000;
    const double a = oracle::exponential_level_for_probability(n, 1e-2);
    const double P = std::exp(oracle::gamma_tail_exact(n, a));
    std::vector<int> ks;
    for (int k = 0; k <= 70; k += 10) ks.push_back(k);
    ISOptions opts;
    opts.keep_terms = true;
    const auto curve = mse_ratio_curve(expo, a, n, ks, L, 8, P, opts);
    bool ok = true;
    std::string detail;
    for (const MSEPoint& p : curve) {
        const bool hit = std::abs(p.ratio - p.reference) <= 0.15;
        ok = ok && hit;
        detail += fmt("k=%d %.3f/%.3f%s ", p.k, p.ratio, p.reference, hit ? "" : "*");
    }
    const double t = timer.seconds();
    report(8, "IS variance reduction", ok && t < 300.0, detail + fmt("%.1f s", t));

    // A 0.5% trimmed MSE shows the trend that a few heavy weights hide.
    std::string trimmed;
    double base = 0.0;
    for (int k : {0, 30, 50, 70}) {
        auto terms = is_estimate(expo, a, n, k, L, 8, opts).terms;
        std::sort(terms.begin(), terms.end());
        double m2 = 0.0;
        for (std::size_t i = 0; i < terms.size() * 995 / 1000; ++i) m2 += (terms[i] - P) * (terms[i] - P);
        if (k == 0) base = m2;
        trimmed += fmt("k=%d %.3f ", k, m2 / base);
    }
    std::printf("             diagnostic: trimmed MSE ratio %s\n", trimmed.c_str());
}

void rao_blackwell() {
    Timer timer;
    RBOptions opts;
    const std::vector<int> grid{2, 5, 10, 20, 50};
    opts.rb_ks = grid;
    const RBReport r = rao_blackwell_gamma(2.0, 1.0, 100, grid, 2000, 1000, 9, opts);
    const double v2 = r.var_rb_by_k.front(), se2 = r.var_rb_stderr_by_k.front();
    bool below = true;
    for (std::size_t j = 0; j < grid.size(); ++j) below = below && v2 <= r.var_initial_by_k[j];
    const auto [lo, hi] = std::minmax_element(r.var_rb_by_k.begin(), r.var_rb_by_k.end());
    const bool flat = *hi - *lo <= 2.0 * se2;
    const double close = std::abs(v2 / r.cr_bound - 1.0);
    report(9, "Rao-Blackwell", below && flat && close <= 0.15,
           fmt("var RB2 %.5f (se %.5f, corrected %.5f), initial k=50 %.5f, RB spread %.5f, CR %.5f (%.1f%%), %.1f s", v2,
               se2, r.var_rb_corrected_by_k.front(), r.var_initial_by_k.back(), *hi - *lo, r.cr_bound, 100 * close,
               timer.seconds()));
}

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

void property_suites() {
    std::vector<std::string> broken;
    CenteredExponentialModel expo;
    GammaModel gamma(2.0, 1.0);
    NormalSquareModel square;

    for (int n = 3; n <= 6; ++n) {
        const double a = 0.25;
        const std::vector<double> path{0.1, -0.3};
        const double plain = oracle::conditional_logpdf_by_convolution(expo, n, n * a, path, 0.0);
        const double tilted = oracle::conditional_logpdf_by_convolution(expo, n, n * a, path, solve_tilt(expo, a));
        if (std::abs(plain - tilted) > 1e-6 * std::abs(plain)) broken.push_back(fmt("tilt invariance n=%d", n));
    }

    struct Case {
        const Model* model;
        ConditioningEvent event;
    };
    const Case cases[] = {{&expo, ConditioningEvent::point_sum(0.3, 20)},
                          {&gamma, ConditioningEvent::point_sum(2.4, 30)},
                          {&square, ConditioningEvent::point_functional(1.3 * 25, 25)}};
    double worst_mass = 0.0;
    for (const Case& c : cases) {
        RngStream r(10, 0);
        const auto ps = sample_path(*c.model, c.event, 6, r);
        StepRecursion rec(*c.model, c.event, {});
        double running = 0.0;
        for (int i = 0; i < 6; ++i) {
            const StepState st = rec.next(i, running);
            const Interval xs = c.model->x_support();
            const double mass =
                quad::integrate([&](double y) { return std::exp(rec.log_factor(st, y)); }, xs.lo, xs.hi,
                                {1e-12, 1e-10, 4000})
                    .value;
            worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
            running += c.model->u(ps.values[i]);
        }
    }
    if (worst_mass > 1e-6) broken.push_back(fmt("factor mass %.2g", worst_mass));

    const Model* models[] = {&expo, &gamma, &square};
    for (const Model* m : models) {
        for (double t : interior_tilt_grid(*m, 25)) {
            const double target = m->cgf_d1(t);
            if (std::abs(m->cgf_d1(solve_tilt(*m, target)) - target) > 1e-10 * std::max(1.0, std::abs(target)))
                broken.push_back("solve_tilt round trip " + m->name());
        }
        for (double t : interior_tilt_grid(*m, 9)) {
            const double x = m->cgf_d1(t);
            const double lhs = log_tilt_ratio(*m, 40, x), rhs = 40 * rate(*m, x);
            if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) broken.push_back("tilt ratio " + m->name());
        }
    }

    const double P8 = std::exp(oracle::gamma_tail_exact(8, 0.5));
    for (int k : {0, 3}) {
        const ISReport r = is_estimate(expo, 0.5, 8, k, 20000, 11);
        if (std::abs(r.estimate - P8) > 3 * r.stderr_) broken.push_back(fmt("IS unbiasedness k=%d", k));
    }

    const double a = oracle::exponential_level_for_probability(100, 1e-8);
    const auto e = ConditioningEvent::point_sum(a, 100);
    ABOptions one, two;
    two.workers = 2;
    const ABEstimate x = estimate_AB(expo, e, 40, 400, 12, one);
    const ABEstimate y = estimate_AB(expo, e, 40, 400, 12, two);
    const ABEstimate z = estimate_AB(expo, e, 40, 400, 12, one);
    if (!same_bits(x.A_hat, y.A_hat) || !same_bits(x.B_hat, y.B_hat) || !same_bits(x.A_hat, z.A_hat))
        broken.push_back("rerun bits");
    ISOptions is2;
    is2.workers = 2;
    if (!same_bits(is_estimate(expo, a, 100, 20, 300, 12).estimate, is_estimate(expo, a, 100, 20, 300, 12, is2).estimate))
        broken.push_back("IS rerun bits");

    std::string detail = broken.empty() ? "tilt invariance, factor mass, round trip, tilt ratio, IS identity, reruns"
                                        : "broken:";
    for (const auto& b : broken) detail += " " + b;
    report(10, "property suites", broken.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<void()>> criteria{gaussian_exactness, exponential_relative_error, saddlepoint_density,
                                                      tail_probability,   k_selection,               histogram_match,
                                                      overshoot_law,      is_variance_reduction,     rao_blackwell,
                                                      property_suites};
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end()) continue;
        try {
            criteria[i]();
        } catch (const std::exception& ex) {
            report(static_cast<int>(i + 1), "", false, std::string("threw: ") + ex.what());
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
