#pragma once

#include "longrun/cond_approx.hpp"
#include "longrun/model.hpp"
#include "longrun/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace longrun {

struct Draw {
    double value = 0.0;
    long proposals = 0;
};

/// Rejection sampling for a density proportional to p(x) n(mu, sigma2, x) through
/// the substitution x = N^{-1}(z), N the N(mu, sigma2) distribution function: z
/// has density proportional to p(N^{-1}(z)) on (0, 1), and is drawn from the
/// envelope K f. Throws EnvelopeViolation when p(N^{-1}(z)) > K f(z) is observed.
Draw inverse_normal_rejection(const std::function<double(double)>& log_p, double mu, double sigma2,
                              const std::function<double(RngStream&)>& sample_f,
                              const std::function<double(double)>& log_f, double log_K, RngStream& rng);

/// Proposal used by sample_modulated.
///   Uniform - the inverse-normal scheme with f uniform and K = sup p_X (u = identity only)
///   Base    - proposals from p_X, accepted with exp(-(u - M)^2 / (2 beta))
///   Tilted  - proposals from the tilted law at alpha, accepted with exp(-(u - center)^2 / (2 beta))
///   Auto    - Tilted when available at alpha, else Uniform for identity u with bounded p_X, else Base
enum class Envelope { Auto, Uniform, Base, Tilted };

Envelope envelope_from_string(const std::string& name);

/// One draw from the density proportional to p_X(x) n(alpha beta + center, beta, u(x)).
Draw sample_modulated(const Model& model, double alpha, double beta, double center, RngStream& rng,
                      Envelope envelope = Envelope::Auto);

/// One draw from the tilted law at t, exact when the model has a tilted sampler.
double sample_tilted_law(const Model& model, double t, RngStream& rng);

struct SamplerOptions {
    Envelope envelope = Envelope::Auto;
    /// Redraws of a step whose value would make the next running target unattainable.
    int max_resamples = 100;
};

struct PathSample {
    std::vector<double> values;
    double log_g = 0.0;
    double log_base = 0.0;
    std::optional<double> randomized_level;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    long proposals = 0;
    int resamples = 0;
};

/// Draws y_1..y_k from g for a point event and scores it with the same step states.
PathSample sample_path(const Model& model, const ConditioningEvent& event, int k, RngStream& rng,
                       const ApproxOptions& approx = {}, const SamplerOptions& options = {});

/// Draws S from the overshoot law on (a, inf) or, when event.c is set, on (a, a + c);
/// then samples a path conditioned on U_{1,n} = nS.
PathSample sample_large_set_path(const Model& model, const ConditioningEvent& event, int k, RngStream& rng,
                                 const ApproxOptions& approx = {}, const SamplerOptions& options = {});

/// Inverse-CDF draw from the overshoot law with rate lambda, truncated to width c when given.
double sample_overshoot(double a, double lambda, std::optional<double> c, RngStream& rng);

}  // namespace longrun
