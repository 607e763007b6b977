#include "longrun/large_set.hpp"

#include "longrun/errors.hpp"
#include "longrun/quadrature.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace longrun {

namespace {

double tilt_above_mean(const Model& model, double a) {
    if (!(a > model.cgf_d1(0.0))) throw RangeError("level must exceed the mean of u(X)");
    return solve_tilt(model, a);
}

}  // namespace

double rate(const Model& model, double x) {
    const double t = solve_tilt(model, x);
    return x * t - model.cgf(t);
}

double log_tail_prob(const Model& model, int n, double a) {
    const double t = tilt_above_mean(model, a);
    const double I = a * t - model.cgf(t);
    return -n * I - 0.5 * std::log(2.0 * std::numbers::pi * n) - std::log(t * std::sqrt(model.cgf_d2(t)));
}

SetDescriptor SetDescriptor::interval(double a, double b) {
    if (!(b > a)) throw DomainError("interval set needs b > a");
    return {Kind::Interval, a, b};
}

double set_density_M(const SetDescriptor& set, double t) {
    if (!(t > 0.0)) throw DomainError("set_density_M needs t > 0");
    if (set.kind == SetDescriptor::Kind::HalfLine || std::isinf(set.b)) return 1.0;
    return -std::expm1(-t * (set.b - set.a));
}

double log_set_density_Mn(const SetDescriptor& set, int n, double t) {
    if (!(t > 0.0)) throw DomainError("log_set_density_Mn needs t > 0");
    if (set.kind == SetDescriptor::Kind::HalfLine || std::isinf(set.b)) return -std::log(t);
    return log1mexp(n * t * (set.b - set.a)) - std::log(t);
}

namespace {

// d/dt and d^2/dt^2 of log M_n(t).
void log_Mn_derivatives(const SetDescriptor& set, int n, double t, double& d1, double& d2) {
    d1 = -1.0 / t;
    d2 = 1.0 / (t * t);
    if (set.kind == SetDescriptor::Kind::Interval && std::isfinite(set.b)) {
        const double w = n * (set.b - set.a);
        const double e = std::expm1(t * w);
        d1 += w / e;
        d2 -= w * w * (e + 1.0) / (e * e);
    }
}

}  // namespace

double log_set_prob(const Model& model, int n, const SetDescriptor& set, SetProbForm form) {
    const double a = set.a;
    double t = tilt_above_mean(model, a);
    double psi = n * model.cgf_d2(t);
    if (form == SetProbForm::Saddle) {
        // Psi_n'(t) = n (m(t) - a) + (log M_n)'(t) is increasing; bracket its root in (0, t_hi).
        auto dpsi = [&](double s) {
            double d1, d2;
            log_Mn_derivatives(set, n, s, d1, d2);
            return n * (model.cgf_d1(s) - a) + d1;
        };
        double lo = t, hi = t;
        const Interval dom = model.t_domain();
        while (dpsi(lo) > 0.0) lo *= 0.5;
        while (dpsi(hi) < 0.0) {
            hi = std::isfinite(dom.hi) ? 0.5 * (hi + dom.hi) : 2.0 * hi;
            if (!dom.contains(hi)) throw NoConvergence("saddle tilt could not be bracketed", lo, hi);
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dpsi(mid) < 0.0) lo = mid;
            else hi = mid;
        }
        t = 0.5 * (lo + hi);
        double d1, d2;
        log_Mn_derivatives(set, n, t, d1, d2);
        psi = n * model.cgf_d2(t) + d2;
    }
    return n * model.cgf(t) + log_set_density_Mn(set, n, t) - n * a * t - 0.5 * std::log(2.0 * std::numbers::pi * psi);
}

double overshoot_logpdf(const Model& model, int n, double a, double v, std::optional<double> c) {
    if (!(v > a)) throw DomainError("overshoot density is supported on v > a");
    if (c && !(v < a + *c)) throw DomainError("truncated overshoot density is supported on (a, a + c)");
    const double lambda = n * tilt_above_mean(model, a);
    double out = std::log(lambda) - lambda * (v - a);
    if (c) out -= log1mexp(lambda * *c);
    return out;
}

double default_truncation_width(const Model& model, int n, double a) {
    return 20.0 / (n * tilt_above_mean(model, a));
}

ConditionReport check_condition_C(int n, int k, double c) {
    ConditionReport r;
    const double nc = n * c;
    const double ratio = nc / (n - k);
    r.values = {nc, ratio};
    std::ostringstream msg;
    if (ratio > 10.0) {
        msg << "n c / (n - k) = " << ratio << " exceeds 10";
        r.warnings.push_back(msg.str());
        r.ok = false;
    }
    if (nc < 10.0) {
        std::ostringstream m2;
        m2 << "n c = " << nc << " is below 10";
        r.warnings.push_back(m2.str());
        r.ok = false;
    }
    return r;
}

ConditionReport check_condition_V(const Model& model, double a, const std::vector<int>& ns) {
    ConditionReport r;
    const double t = tilt_above_mean(model, a);
    const double span = model.u_support().hi - a;
    auto vprime = [&model](double v) {
        const double s = solve_tilt(model, v);
        return model.cgf_d3(s) / model.cgf_d2(s);
    };
    for (int n : ns) {
        const double lambda = n * t;
        auto f = [&](double w) { return vprime(a + w) * std::exp(-lambda * w); };
        const double hi = std::min(span, 60.0 / lambda);
        double value;
        try {
            value = std::sqrt(static_cast<double>(n)) * quad::integrate(f, 0.0, hi).value;
        } catch (const Error&) {
            value = kInf;
        }
        r.values.push_back(value);
    }
    for (std::size_t j = 0; j < r.values.size(); ++j) {
        if (!std::isfinite(r.values[j])) {
            r.ok = false;
            r.warnings.push_back("condition (V) integral is not finite");
        } else if (j > 0 && std::abs(r.values[j]) > 1.5 * std::abs(r.values[j - 1]) + 1e-12) {
            r.ok = false;
            r.warnings.push_back("condition (V) integral grows with n");
        }
    }
    return r;
}

double eval_log_g_nA(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                     const MixtureOptions& options) {
    if (event.kind != EventKind::ExceedanceSet) throw DomainError("eval_log_g_nA needs an exceedance set");
    validate_event(model, event);
    const double a = event.a;
    const double lambda = event.n * solve_tilt(model, a);
    const double c = event.c.value_or(20.0 / lambda);
    const auto& gl = quad::gauss_legendre(options.quad_points);
    const double half = 0.5 * c;
    std::vector<double> terms;
    terms.reserve(gl.nodes.size());
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        const double v = a + half * (1.0 + gl.nodes[j]);
        const double lg = eval_log_g_or_neg_inf(model, event.at_level(v), path, options.approx);
        terms.push_back(std::log(gl.weights[j] * half) + lg - lambda * (v - a));
    }
    const double mixed = log_sum_exp(terms);
    if (mixed == -kInf) throw IntegrationFailure("every mixture node gave an impossible path", 0.0, kInf);
    return std::log(lambda) + mixed - log1mexp(lambda * c);
}

}  // namespace longrun
