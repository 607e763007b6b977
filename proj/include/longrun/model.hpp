#pragma once

#include "longrun/rng.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace longrun {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
    double lo = -kInf;
    double hi = kInf;
    bool contains(double x) const { return x > lo && x < hi; }
};

/// Cumulants of the tilted law of u(X) at tilt t.
struct CumulantProfile {
    double t = 0.0;
    double m = 0.0;
    double s2 = 1.0;
    double mu3 = 0.0;
    double mu4 = 0.0;
};

/// A univariate base density p_X with a conditioning map u and the cumulant
/// generating function of U = u(X), log E exp(tU), together with its first four
/// derivatives. Implementations are immutable once constructed, so a single
/// instance may be shared by concurrent workers.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;

    virtual double base_logpdf(double x) const = 0;
    virtual double u(double x) const { return x; }
    virtual bool u_is_identity() const { return true; }

    virtual double cgf(double t) const = 0;
    virtual double cgf_d1(double t) const = 0;
    virtual double cgf_d2(double t) const = 0;
    virtual double cgf_d3(double t) const = 0;
    virtual double cgf_d4(double t) const = 0;

    virtual Interval t_domain() const = 0;
    /// Values attainable by u(X); also the range of m on t_domain.
    virtual Interval u_support() const = 0;
    /// Support of p_X.
    virtual Interval x_support() const = 0;

    virtual double sample_base(RngStream& rng) const = 0;

    /// True when sample_tilted is exact and cheap enough to serve as a proposal.
    virtual bool has_tilted_sampler() const { return false; }
    /// Draws from the tilted law pi_u at tilt t.
    virtual double sample_tilted(double t, RngStream& rng) const;

    /// log sup_x p_X(x), used as the bound K of the inverse-normal envelope.
    virtual double log_pdf_sup() const = 0;

    /// Closed form for log of the modulated mass  int p_X(x) n(mean, var, u(x)) dx,
    /// when one is known.
    virtual std::optional<double> log_modulated_mass(double mean, double var) const {
        (void)mean;
        (void)var;
        return std::nullopt;
    }

    /// Suggested interior breakpoints for integrating against the tilted law at t.
    virtual std::vector<double> quadrature_breakpoints(double t) const;
};

using ModelPtr = std::shared_ptr<const Model>;

/// X ~ N(0, 1), u(x) = x.
class StandardNormalModel final : public Model {
public:
    std::string name() const override { return "normal"; }
    double base_logpdf(double x) const override;
    double cgf(double t) const override { return 0.5 * t * t; }
    double cgf_d1(double t) const override { return t; }
    double cgf_d2(double) const override { return 1.0; }
    double cgf_d3(double) const override { return 0.0; }
    double cgf_d4(double) const override { return 0.0; }
    Interval t_domain() const override { return {}; }
    Interval u_support() const override { return {}; }
    Interval x_support() const override { return {}; }
    double sample_base(RngStream& rng) const override { return rng.normal(); }
    bool has_tilted_sampler() const override { return true; }
    double sample_tilted(double t, RngStream& rng) const override { return t + rng.normal(); }
    double log_pdf_sup() const override;
    std::optional<double> log_modulated_mass(double mean, double var) const override;
};

/// X = E - 1 with E ~ Exp(1): mean 0, variance 1, support (-1, inf).
class CenteredExponentialModel final : public Model {
public:
    std::string name() const override { return "exponential"; }
    double base_logpdf(double x) const override;
    double cgf(double t) const override;
    double cgf_d1(double t) const override;
    double cgf_d2(double t) const override;
    double cgf_d3(double t) const override;
    double cgf_d4(double t) const override;
    Interval t_domain() const override { return {-kInf, 1.0}; }
    Interval u_support() const override { return {-1.0, kInf}; }
    Interval x_support() const override { return {-1.0, kInf}; }
    double sample_base(RngStream& rng) const override { return rng.exponential() - 1.0; }
    bool has_tilted_sampler() const override { return true; }
    double sample_tilted(double t, RngStream& rng) const override;
    double log_pdf_sup() const override { return 0.0; }
    std::optional<double> log_modulated_mass(double mean, double var) const override;
};

/// Gamma(shape rho, scale theta) with u(x) = x.
class GammaModel final : public Model {
public:
    GammaModel(double shape, double scale);
    std::string name() const override { return "gamma"; }
    double shape() const { return shape_; }
    double scale() const { return scale_; }
    double base_logpdf(double x) const override;
    double cgf(double t) const override;
    double cgf_d1(double t) const override;
    double cgf_d2(double t) const override;
    double cgf_d3(double t) const override;
    double cgf_d4(double t) const override;
    Interval t_domain() const override { return {-kInf, 1.0 / scale_}; }
    Interval u_support() const override { return {0.0, kInf}; }
    Interval x_support() const override { return {0.0, kInf}; }
    double sample_base(RngStream& rng) const override { return scale_ * rng.gamma(shape_); }
    bool has_tilted_sampler() const override { return true; }
    double sample_tilted(double t, RngStream& rng) const override;
    double log_pdf_sup() const override;

private:
    double shape_;
    double scale_;
    double log_norm_;
};

/// X ~ N(0, 1) conditioned through u(x) = x^2, so U is chi-square with one degree of freedom.
class NormalSquareModel final : public Model {
public:
    std::string name() const override { return "normal_square"; }
    double base_logpdf(double x) const override;
    double u(double x) const override { return x * x; }
    bool u_is_identity() const override { return false; }
    double cgf(double t) const override;
    double cgf_d1(double t) const override;
    double cgf_d2(double t) const override;
    double cgf_d3(double t) const override;
    double cgf_d4(double t) const override;
    Interval t_domain() const override { return {-kInf, 0.5}; }
    Interval u_support() const override { return {0.0, kInf}; }
    Interval x_support() const override { return {}; }
    double sample_base(RngStream& rng) const override { return rng.normal(); }
    bool has_tilted_sampler() const override { return true; }
    double sample_tilted(double t, RngStream& rng) const override;
    double log_pdf_sup() const override;
    std::vector<double> quadrature_breakpoints(double t) const override;
};

/// Tilt statistics from the model's derivative evaluators. Throws DomainError
/// if t lies outside t_domain.
CumulantProfile cumulants_at(const Model& model, double t);

struct TiltSolveOptions {
    double tol = 1e-10;
    int max_iterations = 200;
    std::optional<double> start;
};

/// Solves m(t) = alpha by bracketed Newton with bisection fallback, so that
/// |m(t) - alpha| <= tol * max(1, |alpha|). Throws RangeError if alpha is not
/// attainable and NoConvergence if the iteration budget runs out.
double solve_tilt(const Model& model, double alpha, const TiltSolveOptions& options = {});

/// log pi_u(x) at tilt t: log p_X(x) + t u(x) - cgf(t).
double tilted_logpdf(const Model& model, double t, double x);

/// One linearized update of the tilt: t_i + (m_next - m_i) / s2_i.
inline double newton_tilt_step(double t_i, double m_target_next, double m_i, double s2_i) {
    return t_i + (m_target_next - m_i) / s2_i;
}

/// H3(x) = x^3 - 3x; H4(x) = x^4 + 6x^2 - 3 (sign convention as used in the
/// Edgeworth correction terms); H6(x) = x^6 - 15x^4 + 45x^2 - 15.
double hermite(int order, double x);

/// Structural checks: cgf(0) = 0, cgf'' > 0 and cgf' increasing on a grid of t_domain.
struct ModelCheck {
    bool ok = true;
    std::vector<std::string> problems;
};
ModelCheck validate_model(const Model& model, int grid_points = 64);

/// Grid of tilts strictly inside t_domain (finite ends kept at a margin).
std::vector<double> interior_tilt_grid(const Model& model, int points, double span = 3.0);

}  // namespace longrun
