#include "longrun/sampler.hpp"

#include "longrun/errors.hpp"
#include "longrun/special.hpp"

#include <cmath>

namespace longrun {

namespace {

constexpr long kMaxProposals = 5'000'000;

[[noreturn]] void proposal_budget_exhausted() {
    throw RangeError("rejection sampler exceeded its proposal budget");
}

}  // namespace

Draw inverse_normal_rejection(const std::function<double(double)>& log_p, double mu, double sigma2,
                              const std::function<double(RngStream&)>& sample_f,
                              const std::function<double(double)>& log_f, double log_K, RngStream& rng) {
    const double sigma = std::sqrt(sigma2);
    Draw d;
    while (d.proposals < kMaxProposals) {
        ++d.proposals;
        const double z = sample_f(rng);
        const double x = mu + sigma * std_norm_quantile(z);
        const double ratio = log_p(x) - log_K - log_f(z);
        if (ratio > 1e-12) throw EnvelopeViolation("p(N^-1(z)) exceeds K f(z)");
        if (std::log(rng.uniform()) <= ratio) {
            d.value = x;
            return d;
        }
    }
    proposal_budget_exhausted();
}

Envelope envelope_from_string(const std::string& name) {
    if (name == "auto") return Envelope::Auto;
    if (name == "uniform") return Envelope::Uniform;
    if (name == "base") return Envelope::Base;
    if (name == "tilted") return Envelope::Tilted;
    throw ConfigError("unknown envelope '" + name + "' (expected auto, uniform, base or tilted)");
}

double sample_tilted_law(const Model& model, double t, RngStream& rng) {
    if (t == 0.0) return model.sample_base(rng);
    return model.sample_tilted(t, rng);
}

Draw sample_modulated(const Model& model, double alpha, double beta, double center, RngStream& rng,
                      Envelope envelope) {
    if (!(beta > 0.0)) throw DomainError("sample_modulated: beta must be positive");
    const double mean = alpha * beta + center;
    if (envelope == Envelope::Auto) {
        if (model.has_tilted_sampler() && model.t_domain().contains(alpha)) envelope = Envelope::Tilted;
        else if (model.u_is_identity() && std::isfinite(model.log_pdf_sup())) envelope = Envelope::Uniform;
        else envelope = Envelope::Base;
    }
    Draw d;
    switch (envelope) {
        case Envelope::Tilted: {
            if (!model.t_domain().contains(alpha)) throw DomainError("tilted envelope needs alpha in t_domain");
            while (d.proposals < kMaxProposals) {
                ++d.proposals;
                const double y = sample_tilted_law(model, alpha, rng);
                const double r = model.u(y) - center;
                if (std::log(rng.uniform()) <= -0.5 * r * r / beta) {
                    d.value = y;
                    return d;
                }
            }
            proposal_budget_exhausted();
        }
        case Envelope::Base: {
            while (d.proposals < kMaxProposals) {
                ++d.proposals;
                const double y = model.sample_base(rng);
                const double r = model.u(y) - mean;
                if (std::log(rng.uniform()) <= -0.5 * r * r / beta) {
                    d.value = y;
                    return d;
                }
            }
            proposal_budget_exhausted();
        }
        case Envelope::Uniform:
        case Envelope::Auto: {
            if (!model.u_is_identity()) throw DomainError("uniform envelope requires u(x) = x");
            const double log_K = model.log_pdf_sup();
            if (!std::isfinite(log_K)) throw EnvelopeViolation("uniform envelope needs a bounded density");
            return inverse_normal_rejection([&model](double x) { return model.base_logpdf(x); }, mean, beta,
                                            [](RngStream& r) { return r.uniform(); },
                                            [](double) { return 0.0; }, log_K, rng);
        }
    }
    return d;
}

PathSample sample_path(const Model& model, const ConditioningEvent& event, int k, RngStream& rng,
                       const ApproxOptions& approx, const SamplerOptions& options) {
    if (event.kind == EventKind::ExceedanceSet) {
        throw DomainError("sample_path takes a point event; use sample_large_set_path");
    }
    if (k < 1 || k >= event.n) throw DomainError("path length must satisfy 1 <= k < n");
    StepRecursion rec(model, event, approx);
    const Interval us = model.u_support();
    PathSample out;
    out.seed = rng.seed();
    out.stream = rng.stream();
    out.values.reserve(k);
    double running = 0.0;
    for (int i = 0; i < k; ++i) {
        const StepState st = rec.next(i, running);
        double y = 0.0;
        for (int attempt = 0;; ++attempt) {
            if (st.tilted) {
                y = sample_tilted_law(model, st.t_i, rng);
                ++out.proposals;
            } else {
                const Draw d = sample_modulated(model, st.alpha, st.beta, st.center, rng, options.envelope);
                y = d.value;
                out.proposals += d.proposals;
            }
            if (i + 1 == k) break;
            const double m_next = (event.u_sum() - running - model.u(y)) / (event.n - i - 1);
            if (us.contains(m_next)) break;
            if (attempt >= options.max_resamples) {
                throw RangeError("path left the attainable range after repeated resampling");
            }
            ++out.resamples;
        }
        out.log_g += rec.log_factor(st, y);
        out.log_base += model.base_logpdf(y);
        running += model.u(y);
        out.values.push_back(y);
    }
    return out;
}

double sample_overshoot(double a, double lambda, std::optional<double> c, RngStream& rng) {
    const double u = rng.uniform();
    if (!c) return a - std::log(u) / lambda;
    return a - std::log1p(u * std::expm1(-lambda * *c)) / lambda;
}

PathSample sample_large_set_path(const Model& model, const ConditioningEvent& event, int k, RngStream& rng,
                                 const ApproxOptions& approx, const SamplerOptions& options) {
    if (event.kind != EventKind::ExceedanceSet) throw DomainError("sample_large_set_path needs an exceedance set");
    validate_event(model, event);
    const double t = solve_tilt(model, event.a);
    const double level = sample_overshoot(event.a, event.n * t, event.c, rng);
    PathSample out = sample_path(model, event.at_level(level), k, rng, approx, options);
    out.randomized_level = level;
    return out;
}

}  // namespace longrun
