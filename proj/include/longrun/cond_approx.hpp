#pragma once

#include "longrun/model.hpp"
#include "longrun/quadrature.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace longrun {

enum class EventKind { PointSum, PointFunctional, ExceedanceSet };

/// What the walk is conditioned on. `a` is the target mean u_{1,n}/n for point
/// events and the infimum of the set for exceedance events. `anchor` is the
/// level used by the paper_a centering; it equals `a` except inside the
/// exceedance mixture, where each component keeps the set's infimum.
struct ConditioningEvent {
    EventKind kind = EventKind::PointSum;
    double a = 0.0;
    int n = 2;
    std::optional<double> c;
    double anchor = 0.0;

    static ConditioningEvent point_sum(double a, int n);
    static ConditioningEvent point_functional(double u_sum, int n);
    static ConditioningEvent exceedance(double a, int n, std::optional<double> c = std::nullopt);

    double u_sum() const { return a * n; }
    /// The point event at level v that shares this event's anchor.
    ConditioningEvent at_level(double v) const;
};

/// Checks n >= 2, finiteness and the kind-specific preconditions.
void validate_event(const Model& model, const ConditioningEvent& event);

/// Which level centers the Gaussian kernel of each proposal factor.
///   paper_a     - the event anchor a
///   paper_m0    - m0 = u_{1,n}/n, kept fixed along the path
///   adaptive_mi - the running target m_i; the first factor is then also the
///                 recursive one (with m_0), which makes the Gaussian case exact
enum class CenterShift { PaperA, PaperM0, AdaptiveMi };

enum class NormalizerMethod { Auto, Quadrature, MonteCarlo };

std::string to_string(CenterShift shift);
CenterShift center_shift_from_string(const std::string& name);

struct ApproxOptions {
    CenterShift shift = CenterShift::PaperM0;
    NormalizerMethod normalizer = NormalizerMethod::Auto;
    quad::Tolerance tol{1e-10, 1e-8, 2000};
    /// Draws and seed for the Monte Carlo normalizer.
    int mc_draws = 1'000'000;
    std::uint64_t mc_seed = 0;
    /// Start each tilt solve from the linearized update of the previous step.
    bool warm_start = true;
    /// Skip log C_i when only draws are needed; log densities are then NaN.
    bool compute_normalizer = true;
};

/// Per-step record of the recursion. Factor i generates y_{i+1} given y_1..y_i.
/// When `tilted` is set the factor is the tilted law at t_i (alpha, beta and
/// log_C are then unused); otherwise it is C_i p_X(y) n(alpha beta + center, beta, u(y)).
struct StepState {
    int i = 0;
    double running_u_sum = 0.0;
    double m_i = 0.0;
    double t_i = 0.0;
    CumulantProfile profile;
    double alpha = 0.0;
    double beta = 0.0;
    double center = 0.0;
    double log_C = 0.0;
    bool tilted = false;

    double kernel_mean() const { return alpha * beta + center; }
};

struct NormalizerResult {
    double log_C = 0.0;
    /// Standard error on the log scale (zero for deterministic methods) or the
    /// quadrature error bound relative to the integral.
    double error = 0.0;
    std::string method;
};

/// log C = -log int p_X(x) n(alpha beta + center, beta, u(x)) dx.
NormalizerResult normalizing_constant(const Model& model, double alpha, double beta, double center,
                                      const ApproxOptions& options = {});

/// Builds the successive StepStates of one path. The sampler and the evaluator
/// both go through this class, so a sampled path re-scores bit-for-bit.
class StepRecursion {
public:
    StepRecursion(const Model& model, const ConditioningEvent& event, const ApproxOptions& options);

    /// State of factor i given the sum of the first i values of u. Steps must be
    /// requested in increasing order for warm starts to apply.
    StepState next(int i, double running_u_sum);

    /// log of factor `state` at y.
    double log_factor(const StepState& state, double y) const;

    const Model& model() const { return model_; }
    const ConditioningEvent& event() const { return event_; }
    const ApproxOptions& options() const { return options_; }

private:
    const Model& model_;
    ConditioningEvent event_;
    ApproxOptions options_;
    std::optional<CumulantProfile> previous_;
};

/// All-in-one helper for a single step.
StepState step_params(const Model& model, const ConditioningEvent& event, int i, double running_u_sum,
                      const ApproxOptions& options = {});

struct LogG {
    double log_g = 0.0;
    std::vector<StepState> trace;
};

/// log g(y_1..y_k) for a point event. Throws RangeError if the path is impossible
/// under the recursion.
LogG eval_log_g(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                const ApproxOptions& options = {}, bool keep_trace = false);

/// Same value without a trace; returns -inf instead of throwing RangeError.
double eval_log_g_or_neg_inf(const Model& model, const ConditioningEvent& event, std::span<const double> path,
                             const ApproxOptions& options = {});

struct FirstOrder {
    double log_value = 0.0;
    /// The Edgeworth bracket fell below the floor and was clamped.
    bool clamped = false;
};

FirstOrder eval_log_first_order(const Model& model, double a, int n, std::span<const double> path);

inline constexpr double kEdgeworthFloor = 1e-12;

}  // namespace longrun
