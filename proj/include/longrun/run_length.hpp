#pragma once

#include "longrun/cond_approx.hpp"
#include "longrun/errors.hpp"
#include "longrun/model.hpp"
#include "longrun/sampler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace longrun {

/// log of sqrt(n) phi^n(t) exp(-n t u) / (s(t) sqrt(2 pi)), m(t) = u: the
/// saddlepoint density of U_{1,n}/n at u.
double saddlepoint_mean_logpdf(const Model& model, int n, double u);

/// count * (t m - cgf(t)) with m(t) = m, the log of [pi^m(m) / p_U(m)]^count.
double log_tilt_ratio(const Model& model, int count, double m_level);

/// Where the replicate paths of the A/B estimators come from.
///   Base     - k i.i.d. draws from p_X, weighted by g / p_X
///   Proposal - draws from g itself
enum class ABSampling { Base, Proposal };

struct ABOptions {
    ABSampling sampling = ABSampling::Base;
    ApproxOptions approx;
    SamplerOptions sampler;
    /// Replaces the saddlepoint proxy of log p(y_1..y_k | U_{1,n}) when set.
    std::function<double(std::span<const double>)> oracle_logp;
    /// Per-replicate terms above this empirical quantile are capped.
    double winsor_quantile = 0.9999;
    int workers = 1;
};

struct ABEstimate {
    double A_hat = 1.0;
    double B_hat = 1.0;
    double stderr_A = 0.0;
    double stderr_B = 0.0;
    int used = 0;
    int discarded = 0;
    bool winsorized = false;
};

/// Monte Carlo estimates of A = E_g[(g/p)^2] and B = E_g[g/p] from L replicate
/// paths; replicate l uses RngStream(seed, l). Paths the recursion cannot follow
/// are discarded and counted.
ABEstimate estimate_AB(const Model& model, const ConditioningEvent& event, int k, int L, std::uint64_t seed,
                       const ABOptions& options = {});

struct KRow {
    int k = 0;
    double ERE_bar = 0.0;
    double VRE_bar = 0.0;
    double VRE_raw = 0.0;
    double CI_lo = 0.0;
    double CI_hi = 0.0;
    int L_used = 0;
    int discarded = 0;
    double mc_stderr = 0.0;
    bool winsorized = false;
};

KRow make_k_row(int k, const ABEstimate& est);

struct KReport {
    std::vector<KRow> rows;
    std::optional<int> k_delta;
    double delta = 0.0;
    int L = 0;
};

class NotReached : public Error {
public:
    NotReached(const std::string& what, KReport report) : Error(what), report(std::move(report)) {}
    KReport report;
};

struct SelectOptions {
    ABOptions ab;
    /// Scan k = step, 2 step, ... instead of the refined geometric grid.
    std::optional<int> k_step;
    /// Evaluate every grid point instead of stopping at the first crossing.
    bool full_table = false;
};

/// Geometric grid {1, 2, 4, ...} below n.
std::vector<int> default_k_grid(int n);

/// Scans k in ascending order and returns at the first k whose band contains
/// delta. With the default geometric grid the crossing is refined by bisection.
/// Throws NotReached (carrying the table) if no scanned k qualifies.
KReport select_k(const Model& model, const ConditioningEvent& event, double delta, int L,
                 std::vector<int> k_grid, std::uint64_t seed, const SelectOptions& options = {});

}  // namespace longrun
