#include "longrun/cond_approx.hpp"

#include "longrun/errors.hpp"
#include "longrun/rng.hpp"
#include "longrun/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace longrun {

ConditioningEvent ConditioningEvent::point_sum(double a, int n) {
    return {EventKind::PointSum, a, n, std::nullopt, a};
}

ConditioningEvent ConditioningEvent::point_functional(double u_sum, int n) {
    const double a = u_sum / n;
    return {EventKind::PointFunctional, a, n, std::nullopt, a};
}

ConditioningEvent ConditioningEvent::exceedance(double a, int n, std::optional<double> c) {
    return {EventKind::ExceedanceSet, a, n, c, a};
}

ConditioningEvent ConditioningEvent::at_level(double v) const {
    ConditioningEvent e{EventKind::PointFunctional, v, n, std::nullopt, anchor};
    if (kind == EventKind::PointSum) e.kind = EventKind::PointSum;
    return e;
}

void validate_event(const Model& model, const ConditioningEvent& event) {
    if (event.n < 2) throw DomainError("conditioning event needs n >= 2");
    if (!std::isfinite(event.a)) throw DomainError("conditioning level must be finite");
    if (event.kind == EventKind::PointSum && !model.u_is_identity()) {
        throw DomainError("point-sum conditioning requires u(x) = x; use a functional event");
    }
    if (event.kind == EventKind::ExceedanceSet) {
        if (!(event.a > model.cgf_d1(0.0))) throw DomainError("exceedance level must exceed the mean of u(X)");
        if (event.c && !(*event.c > 0.0)) throw DomainError("truncation width c must be positive");
    }
}

std::string to_string(CenterShift shift) {
    switch (shift) {
        case CenterShift::PaperA: return "paper_a";
        case CenterShift::PaperM0: return "paper_m0";
        case CenterShift::AdaptiveMi: return "adaptive_mi";
    }
    return "paper_m0";
}

CenterShift center_shift_from_string(const std::string& name) {
    if (name == "paper_a") return CenterShift::PaperA;
    if (name == "paper_m0") return CenterShift::PaperM0;
    if (name == "adaptive_mi") return CenterShift::AdaptiveMi;
    throw ConfigError("unknown center shift '" + name + "' (expected paper_a, paper_m0 or adaptive_mi)");
}

namespace {

// Integrates exp(log_f) over the support of p_X, tightening the absolute
// tolerance when the integral turns out to be small.
double log_integral(const Model& model, const std::function<double(double)>& log_f, std::vector<double> cuts,
                    const quad::Tolerance& tol, double* rel_error) {
    const Interval xs = model.x_support();
    std::sort(cuts.begin(), cuts.end());
    auto f = [&log_f](double x) {
        const double v = log_f(x);
        return v == -kInf ? 0.0 : std::exp(v);
    };
    quad::Result r = quad::integrate_panels(f, xs.lo, xs.hi, cuts, tol);
    if (r.value > 0.0 && tol.abs > tol.rel * r.value) {
        quad::Tolerance tight = tol;
        tight.abs = 0.1 * tol.rel * r.value;
        r = quad::integrate_panels(f, xs.lo, xs.hi, cuts, tight);
    }
    if (!(r.value > 0.0) || !std::isfinite(r.value)) {
        throw IntegrationFailure("normalizing integral vanished or diverged", r.value, r.error);
    }
    if (rel_error) *rel_error = r.error / r.value;
    return std::log(r.value);
}

double monte_carlo_log_mass(const Model& model, double mean, double beta, const ApproxOptions& options,
                            double* stderr_log) {
    RngStream rng(options.mc_seed, 0);
    const int L = std::max(options.mc_draws, 2);
    std::vector<double> logs(L);
    for (int l = 0; l < L; ++l) logs[l] = norm_logpdf(model.u(model.sample_base(rng)), mean, beta);
    const double peak = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(peak)) throw IntegrationFailure("Monte Carlo normalizer saw no mass", 0.0, kInf);
    std::vector<double> scaled(L), squares(L);
    for (int l = 0; l < L; ++l) {
        scaled[l] = std::exp(logs[l] - peak);
        squares[l] = scaled[l] * scaled[l];
    }
    const double mean_scaled = pairwise_sum(scaled) / L;
    const double var = std::max(0.0, pairwise_sum(squares) / L - mean_scaled * mean_scaled) * L / (L - 1.0);
    if (stderr_log) *stderr_log = std::sqrt(var / L) / mean_scaled;
    return peak + std::log(mean_scaled);
}

}  // namespace

NormalizerResult normalizing_constant(const Model& model, double alpha, double beta, double center,
                                      const ApproxOptions& options) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("normalizing_constant: beta must be positive");
    const double mean = alpha * beta + center;
    NormalizerResult out;
    if (options.normalizer == NormalizerMethod::MonteCarlo) {
        out.log_C = -monte_carlo_log_mass(model, mean, beta, options, &out.error);
        out.method = "monte_carlo";
        return out;
    }
    if (options.normalizer == NormalizerMethod::Auto) {
        if (auto closed = model.log_modulated_mass(mean, beta)) {
            out.log_C = -*closed;
            out.method = "closed_form";
            return out;
        }
    }
    out.method = "quadrature";
    std::vector<double> cuts;
    if (model.u_is_identity()) {
        const double sd = std::sqrt(beta);
        for (double z : {-8.0, -3.0, 0.0, 3.0, 8.0}) cuts.push_back(center + z * sd);
    }
    if (model.t_domain().contains(alpha)) {
        // n(alpha beta + c, beta, u) = exp(alpha u) exp(-(u - c)^2 / (2 beta)) times constants, so the
        // integral factors through the tilted law at alpha and the remaining integrand lies in (0, 1].
        const double lcgf = model.cgf(alpha);
        const double base = -0.5 * std::log(beta) - kLogSqrt2Pi - 0.5 * alpha * alpha * beta - alpha * center + lcgf;
        auto log_f = [&](double x) {
            const double lp = model.base_logpdf(x);
            if (lp == -kInf) return -kInf;
            const double u = model.u(x);
            const double d = u - center;
            return lp + alpha * u - lcgf - 0.5 * d * d / beta;
        };
        auto more = model.quadrature_breakpoints(alpha);
        if (model.u_is_identity()) {
            const double m = model.cgf_d1(alpha);
            const double s2 = model.cgf_d2(alpha);
            more.push_back((m * beta + center * s2) / (beta + s2));
        }
        cuts.insert(cuts.end(), more.begin(), more.end());
        out.log_C = -(base + log_integral(model, log_f, cuts, options.tol, &out.error));
        return out;
    }
    const double peak = -0.5 * std::log(beta) - kLogSqrt2Pi +
                        (std::isfinite(model.log_pdf_sup()) ? model.log_pdf_sup() : 0.0);
    auto log_f = [&](double x) {
        const double lp = model.base_logpdf(x);
        if (lp == -kInf) return -kInf;
        return lp + norm_logpdf(model.u(x), mean, beta) - peak;
    };
    auto more = model.quadrature_breakpoints(0.0);
    cuts.insert(cuts.end(), more.begin(), more.end());
    out.log_C = -(peak + log_integral(model, log_f, cuts, options.tol, &out.error));
    return out;
}

StepRecursion::StepRecursion(const Model& model, const ConditioningEvent& event, const ApproxOptions& options)
    : model_(model), event_(event), options_(options) {
    validate_event(model, event);
}

StepState StepRecursion::next(int i, double running_u_sum) {
    const int n = event_.n;
    if (i < 0 || i > n - 2) throw DomainError("step index must satisfy 0 <= i <= n-2");
    StepState s;
    s.i = i;
    s.running_u_sum = running_u_sum;
    s.m_i = (event_.u_sum() - running_u_sum) / (n - i);
    if (!model_.u_support().contains(s.m_i)) {
        std::ostringstream msg;
        msg << "running target m_" << i << " = " << s.m_i << " left the attainable range";
        throw RangeError(msg.str());
    }
    TiltSolveOptions tso;
    if (options_.warm_start && previous_) {
        tso.start = newton_tilt_step(previous_->t, s.m_i, previous_->m, previous_->s2);
    }
    s.t_i = solve_tilt(model_, s.m_i, tso);
    s.profile = cumulants_at(model_, s.t_i);
    previous_ = s.profile;

    s.tilted = (i == 0 && options_.shift != CenterShift::AdaptiveMi);
    if (s.tilted) return s;

    const double rest = n - i - 1.0;
    const double s2 = s.profile.s2;
    s.beta = s2 * rest;
    s.alpha = s.t_i + s.profile.mu3 / (2.0 * s2 * s2 * rest);
    switch (options_.shift) {
        case CenterShift::PaperA: s.center = event_.anchor; break;
        case CenterShift::PaperM0: s.center = event_.a; break;
        case CenterShift::AdaptiveMi: s.center = s.m_i; break;
    }
    s.log_C = options_.compute_normalizer
                  ? normalizing_constant(model_, s.alpha, s.beta, s.center, options_).log_C
                  : std::numeric_limits<double>::quiet_NaN();
    return s;
}

double StepRecursion::log_factor(const StepState& state, double y) const {
    if (state.tilted) return tilted_logpdf(model_, state.t_i, y);
    const double lp = model_.base_logpdf(y);
    if (lp == -kInf) return lp;
    return state.log_C + lp + norm_logpdf(model_.u(y), state.kernel_mean(), state.beta);
}

StepState step_params(const Model& model, const ConditioningEvent& event, int i, double running_u_sum,
                      const ApproxOptions& options) {
    StepRecursion rec(model, event, options);
    return rec.next(i, running_u_sum);
}

LogG eval_log_g(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                const ApproxOptions& options, bool keep_trace) {
    if (event.kind == EventKind::ExceedanceSet) {
        throw DomainError("eval_log_g takes a point event; use eval_log_g_nA for exceedance sets");
    }
    const std::size_t k = path.size();
    if (k < 1 || static_cast<int>(k) >= event.n) throw DomainError("path length must satisfy 1 <= k < n");
    StepRecursion rec(model, event, options);
    LogG out;
    if (keep_trace) out.trace.reserve(k);
    double running = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const StepState st = rec.next(static_cast<int>(i), running);
        out.log_g += rec.log_factor(st, path[i]);
        running += model.u(path[i]);
        if (keep_trace) out.trace.push_back(st);
    }
    return out;
}

double eval_log_g_or_neg_inf(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                             const ApproxOptions& options) {
    try {
        return eval_log_g(model, event, path, options).log_g;
    } catch (const RangeError&) {
        return -kInf;
    }
}

FirstOrder eval_log_first_order(const Model& model, double a, int n, std::span<const double> path) {
    if (!model.u_is_identity()) throw DomainError("first-order approximation requires u(x) = x");
    const int k = static_cast<int>(path.size());
    if (k < 1 || k >= n) throw DomainError("path length must satisfy 1 <= k < n");
    const double t = solve_tilt(model, a);
    const CumulantProfile p = cumulants_at(model, t);
    const double s = std::sqrt(p.s2);
    double log_tilted = 0.0, sum = 0.0;
    for (double x : path) {
        log_tilted += tilted_logpdf(model, t, x);
        sum += x;
    }
    const double root = std::sqrt(static_cast<double>(n - k));
    const double z = (k * a - sum) / (s * root);
    double bracket = 1.0 + p.mu3 / (6.0 * s * s * s * root) * hermite(3, z);
    FirstOrder out;
    if (!(bracket > kEdgeworthFloor)) {
        bracket = kEdgeworthFloor;
        out.clamped = true;
    }
    out.log_value = log_tilted - 0.5 * z * z + 0.5 * std::log(static_cast<double>(n) / (n - k)) + std::log(bracket);
    return out;
}

}  // namespace longrun
